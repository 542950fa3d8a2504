#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metareg/divergence.hpp"
#include "metareg/metrics.hpp"
#include "metareg/problems.hpp"

namespace metareg {

/* exact          per-coordinate saddle point, phi'(eta/alpha) = alpha^2 g^2
   alternating    closed form alpha = eta / (phi')^{-1}(eta^2 g^2)
   sc_exact       flat-regularizer rule, lambda (a_t/a^2) phi'(a_t/a) = g^2
   sc_alternating closed form alpha = a_t / (phi')^{-1}(a_t g^2 / lambda)
   scalar_*       one shared rate driven by |g|_2^2 */
enum class RuleVariant {
  exact,
  alternating,
  sc_exact,
  sc_alternating,
  scalar_exact,
  scalar_alternating,
};

RuleVariant parse_rule(const std::string& name);  // throws std::invalid_argument
std::string rule_name(RuleVariant rule);
bool rule_is_scalar(RuleVariant rule);
bool rule_is_sc(RuleVariant rule);

struct RateBox {
  Vec lo;
  Vec hi;
};

struct OptimizerConfig {
  DivergenceSpec divergence;
  RuleVariant rule = RuleVariant::exact;
  double alpha0 = 1.0;
  double lambda = 1.0;       // flat rules only
  double clip_factor = 0.5;  // growth clip alpha_{t+1} >= clip_factor * alpha_t
  std::optional<RateBox> rate_box;
  /* reference rates eta_t; empty means eta_t = alpha_t (the default
     schedule). Entry t is broadcast across coordinates. */
  std::vector<double> eta_override;
};

struct StepDiagnostics {
  long clip_hits = 0;     // growth clip bound
  long domain_clips = 0;  // (phi')^{-1} argument out of domain
  long floor_hits = 0;    // positivity floor 1e-300
};

struct OptimizerState {
  Vec x;
  Vec alpha;  // size d, or size 1 for scalar rules
  long t = 0;
  StepDiagnostics diag;
};

OptimizerState init_state(const OptimizerConfig& cfg, const Vec& x0);

/* One update of (alpha, x): solve the rate rule, floor by the growth clip,
   project onto the rate box if configured, then x -= alpha_new .* grad.
   Non-finite gradients throw std::invalid_argument. */
void step(OptimizerState& state, const Vec& grad, const OptimizerConfig& cfg);

/* Coordinate-wise floor alpha_next >= clip_factor * alpha_prev. */
Vec apply_growth_clip(const Vec& alpha_prev, const Vec& alpha_next,
                      double clip_factor, StepDiagnostics* diag = nullptr);

/* Clamp onto [lo, hi]; the clamp of the unconstrained maximizer is the
   box-constrained maximizer of the per-step rate objective. */
Vec project_rate_box(const Vec& alpha, const RateBox& box);

/* Drive the configured rule over the problem (full batch, or the minibatch
   stream when problem.stream.batch_size > 0) and record the full trace.
   Deterministic in (config, problem, horizon, seed). */
RunRecord run(const OptimizerConfig& cfg, const ProblemInstance& problem,
              long horizon, std::uint64_t seed);

}  // namespace metareg
