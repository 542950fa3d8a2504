#pragma once

#include <cstdint>
#include <string>

#include "metareg/metrics.hpp"
#include "metareg/problems.hpp"

namespace metareg {

/* Reference step-size methods sharing one state layout. alpha0 seeds the
   diagonal accumulators (adagrad/wngrad), the BB fallback step and the
   hypergradient initial rate. */
struct BaselineState {
  Vec x;
  Vec accum;       // adagrad: sum of g^2; wngrad: b_t (both per coordinate)
  double alpha = 0.0;  // scalar methods
  Vec prev_x;
  Vec prev_grad;
  bool has_prev = false;
  long t = 0;
};

BaselineState init_baseline(const std::string& method, const Vec& x0,
                            double alpha0);

/* alpha_{t+1,j} = 1 / sqrt(1/alpha0^2 + sum_{s<=t} g_{s,j}^2) */
void adagrad_step(BaselineState& s, const Vec& grad, double alpha0);

/* b_{t+1,j} = b_{t,j} + g_{t,j}^2 / b_{t,j}, alpha = 1/b, b_0 = 1/alpha0 */
void wngrad_step(BaselineState& s, const Vec& grad, double alpha0);

/* Barzilai-Borwein, variant 1: <s,s>/<s,y>, variant 2: <s,y>/<y,y>; falls
   back to fallback_alpha on the first step and on degenerate curvature
   (<s,y> <= 0 or tiny). Full-batch only. */
void bb_step(BaselineState& s, const Vec& grad, int variant,
             double fallback_alpha);

/* alpha_{t+1} = max(alpha_t + beta <g_t, g_{t-1}>, 1e-12) */
void hypergradient_step(BaselineState& s, const Vec& grad, double beta,
                        double alpha0);

void gd_fixed_step(BaselineState& s, const Vec& grad, double alpha0);

struct BaselineOptions {
  double hyper_beta = 1e-4;
  std::uint64_t seed = 0;
};

/* method: adagrad | wngrad | bb1 | bb2 | hypergrad | gd. BB methods reject
   minibatch streams (std::invalid_argument). */
RunRecord run_baseline(const std::string& method, const ProblemInstance& problem,
                       double alpha0, long horizon,
                       const BaselineOptions& opts = {});

}  // namespace metareg
