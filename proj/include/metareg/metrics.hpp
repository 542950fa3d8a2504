#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metareg/divergence.hpp"
#include "metareg/problems.hpp"

namespace metareg {

/* Full trace of one optimization run, enough to evaluate every bound without
   re-running. Arrays are indexed by step t = 0..T-1; loss[t] and
   grad_sq_coord.row(t) are taken at the pre-step iterate x_t, alpha rows
   describe the rate used to move x_t -> x_{t+1}. For baselines the
   divergence-specific fields are empty/NaN. */
struct RunRecord {
  std::map<std::string, std::string> config;  // provenance echo, serialized as-is

  std::string method;      // "meta" or a baseline id
  std::string divergence;  // meta runs only
  std::string rule;        // meta runs only
  double alpha0 = 0.0;
  double lambda = 0.0;
  double clip_factor = 0.0;
  double gamma_at_clip = 0.0;  // gamma(1/clip_factor)
  double phi_l = 0.0;
  std::uint64_t seed = 0;
  int dim = 0;
  int batch = 0;  // 0: full batch
  long horizon = 0;

  Vec x_start;
  Vec x_star;        // comparator
  double mu_min = 0.0;  // per-step strong convexity when known

  std::vector<double> loss;          // f_t(x_t)
  std::vector<double> loss_star;     // f_t(x_star)
  std::vector<double> grad_sq_norm;  // |g_t|_2^2
  std::vector<double> grad_inf;      // |g_t|_inf
  std::vector<double> dist_inf;      // |x_t - x_star|_inf
  std::vector<double> alpha_min;     // min_j alpha_{t+1,j}
  std::vector<double> alpha_max;
  Mat grad_sq_coord;  // T x d, g_{t,j}^2

  long clip_hits = 0;
  long domain_clips = 0;
  long floor_hits = 0;
  bool aborted = false;
  std::string abort_reason;

  long steps() const { return static_cast<long>(loss.size()); }
};

/* R(T) = sum_{t<T} (f_t(x_t) - f_t(x_star)) for T = 1..steps. */
std::vector<double> regret_curve(const RunRecord& rec);

/* min_{t<T} |grad|_2^2; T < 0 means the whole run. */
double min_grad_norm(const RunRecord& rec, long T = -1);

/* Anytime regret bound for the exact/alternating rules:
     R(T) <= 1/2 [ (1 + D_T^2/gamma) c_T sum_j |g_{0:T-1,j}|_2 + |x0-x*|^2/alpha0 ]
   with D_T, G_T running maxima of |x_t-x*|_inf, |g_t|_inf and
     c_T = sqrt(2 l + 4 alpha0^2 G_T^2)        (exact rules)
     c_T = max(sqrt(2 l), 2 alpha0 G_T)        (alternating rules)
   Requires a meta run with recorded gamma/l; throws std::invalid_argument
   otherwise. */
std::vector<double> bound_thm5_curve(const RunRecord& rec);
double bound_thm5(const RunRecord& rec);

/* Anytime regret bound for the flat strongly convex rules, valid when
   lambda >= lambda_floor:
     R(T) <= 1/2 [ lambda l (1 + alpha0 G_T^2/(lambda l))^2
                       * sum_j ln(1 + alpha0 S_{T,j}/(lambda l)) + |x0-x*|^2/alpha0 ]
   (sc_exact; sc_alternating drops the squared prefactor), S_{T,j} the running
   sum of g_{t,j}^2. */
std::vector<double> bound_log_curve(const RunRecord& rec);
double bound_log(const RunRecord& rec);

/* Least-squares slope of ln(curve[t]) vs ln(t+1) over the trailing `window`
   entries with positive values; NaN if fewer than two usable points. */
double loglog_slope(const std::vector<double>& curve, long window);

/* Smallest lambda for which the log-regret guarantee applies:
   G^2 / (gamma(1/clip_factor) * mu_min(problem)). */
double lambda_floor(const ProblemInstance& p, const DivergenceSpec& spec,
                    double grad_inf_bound, double clip_factor);

/* Deterministic serialization; identical records give identical bytes. */
std::string record_to_json(const RunRecord& rec);
void write_record_json(const RunRecord& rec, const std::string& path);

/* Per-step CSV: t, loss, grad_sq_norm, alpha_min, alpha_max, regret,
   bound_thm5, bound_log (bound columns empty when not applicable). */
void write_record_csv(const RunRecord& rec, const std::string& path);

}  // namespace metareg
