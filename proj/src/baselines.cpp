#include "metareg/baselines.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace metareg {

namespace {

const double kRateFloor = 1e-12;

bool known_baseline(const std::string& m) {
  return m == "adagrad" || m == "wngrad" || m == "bb1" || m == "bb2" ||
         m == "hypergrad" || m == "gd";
}

void check_grad(const BaselineState& s, const Vec& grad) {
  if (grad.size() != s.x.size())
    throw std::invalid_argument("baseline step: gradient dimension mismatch");
  if (!grad.allFinite())
    throw std::invalid_argument("baseline step: non-finite gradient");
}

}  // namespace

BaselineState init_baseline(const std::string& method, const Vec& x0,
                            double alpha0) {
  if (!known_baseline(method))
    throw std::invalid_argument("unknown baseline: " + method);
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0))
    throw std::invalid_argument("baseline: alpha0 must be positive finite");
  BaselineState s;
  s.x = x0;
  s.alpha = alpha0;
  if (method == "adagrad")
    s.accum = Vec::Zero(x0.size());
  else if (method == "wngrad")
    s.accum = Vec::Constant(x0.size(), 1.0 / alpha0);
  return s;
}

void adagrad_step(BaselineState& s, const Vec& grad, double alpha0) {
  check_grad(s, grad);
  s.accum.array() += grad.array().square();
  const double inv0 = 1.0 / (alpha0 * alpha0);
  for (Eigen::Index j = 0; j < s.x.size(); ++j) {
    double a = 1.0 / std::sqrt(inv0 + s.accum[j]);
    s.x[j] -= a * grad[j];
  }
  ++s.t;
}

void wngrad_step(BaselineState& s, const Vec& grad, double /*alpha0*/) {
  check_grad(s, grad);
  for (Eigen::Index j = 0; j < s.x.size(); ++j) {
    s.accum[j] += grad[j] * grad[j] / s.accum[j];
    s.x[j] -= grad[j] / s.accum[j];
  }
  ++s.t;
}

void bb_step(BaselineState& s, const Vec& grad, int variant,
             double fallback_alpha) {
  check_grad(s, grad);
  if (variant != 1 && variant != 2)
    throw std::invalid_argument("bb_step: variant must be 1 or 2");
  double a = fallback_alpha;
  if (s.has_prev) {
    Vec sv = s.x - s.prev_x;
    Vec yv = grad - s.prev_grad;
    double sy = sv.dot(yv);
    double cand = variant == 1 ? sv.squaredNorm() / sy : sy / yv.squaredNorm();
    if (sy > 1e-300 && std::isfinite(cand) && cand > 0.0) a = cand;
  }
  s.prev_x = s.x;
  s.prev_grad = grad;
  s.has_prev = true;
  s.alpha = a;
  s.x -= a * grad;
  ++s.t;
}

void hypergradient_step(BaselineState& s, const Vec& grad, double beta,
                        double alpha0) {
  check_grad(s, grad);
  double a = s.has_prev ? s.alpha + beta * grad.dot(s.prev_grad) : alpha0;
  if (!(a > kRateFloor)) a = kRateFloor;
  s.prev_grad = grad;
  s.has_prev = true;
  s.alpha = a;
  s.x -= a * grad;
  ++s.t;
}

void gd_fixed_step(BaselineState& s, const Vec& grad, double alpha0) {
  check_grad(s, grad);
  s.alpha = alpha0;
  s.x -= alpha0 * grad;
  ++s.t;
}

RunRecord run_baseline(const std::string& method, const ProblemInstance& problem,
                       double alpha0, long horizon, const BaselineOptions& opts) {
  if (!known_baseline(method))
    throw std::invalid_argument("unknown baseline: " + method);
  if (horizon < 1) throw std::invalid_argument("run_baseline: horizon must be >= 1");
  const bool online = problem.stream.batch_size > 0;
  if (online && (method == "bb1" || method == "bb2"))
    throw std::invalid_argument("run_baseline: BB methods are full-batch only");

  const int d = problem.dim();
  std::optional<OnlineStream> stream;
  if (online) stream.emplace(problem, problem.stream.batch_size, horizon, opts.seed);

  Vec x0 = problem.x0.size() == d ? problem.x0 : Vec::Zero(d);
  Vec xstar = online ? stream->comparator() : optimum(problem);
  double fstar_full = online ? 0.0 : loss(problem, xstar);

  RunRecord rec;
  rec.method = method;
  rec.alpha0 = alpha0;
  rec.lambda = std::numeric_limits<double>::quiet_NaN();
  rec.clip_factor = std::numeric_limits<double>::quiet_NaN();
  rec.gamma_at_clip = std::numeric_limits<double>::quiet_NaN();
  rec.phi_l = std::numeric_limits<double>::quiet_NaN();
  rec.seed = opts.seed;
  rec.dim = d;
  rec.batch = online ? problem.stream.batch_size : 0;
  rec.horizon = horizon;
  rec.x_start = x0;
  rec.x_star = xstar;
  rec.mu_min = mu_min_of(problem);
  rec.loss.reserve(horizon);
  rec.grad_sq_coord.resize(horizon, d);

  BaselineState st = init_baseline(method, x0, alpha0);
  const double inv0sq = 1.0 / (alpha0 * alpha0);
  for (long t = 0; t < horizon; ++t) {
    double ft = online ? stream->loss(t, st.x) : loss(problem, st.x);
    Vec g = online ? stream->gradient(t, st.x) : gradient(problem, st.x);
    if (!std::isfinite(ft) || !g.allFinite()) {
      rec.aborted = true;
      rec.abort_reason = "non-finite loss or gradient at step " + std::to_string(t);
      break;
    }
    rec.loss.push_back(ft);
    rec.loss_star.push_back(online ? stream->loss(t, xstar) : fstar_full);
    rec.grad_sq_norm.push_back(g.squaredNorm());
    rec.grad_inf.push_back(g.cwiseAbs().maxCoeff());
    rec.dist_inf.push_back((st.x - xstar).cwiseAbs().maxCoeff());
    rec.grad_sq_coord.row(t) = g.array().square().transpose();

    if (method == "adagrad")
      adagrad_step(st, g, alpha0);
    else if (method == "wngrad")
      wngrad_step(st, g, alpha0);
    else if (method == "bb1")
      bb_step(st, g, 1, alpha0);
    else if (method == "bb2")
      bb_step(st, g, 2, alpha0);
    else if (method == "hypergrad")
      hypergradient_step(st, g, opts.hyper_beta, alpha0);
    else
      gd_fixed_step(st, g, alpha0);

    if (method == "adagrad") {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        double a = 1.0 / std::sqrt(inv0sq + st.accum[j]);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      rec.alpha_min.push_back(lo);
      rec.alpha_max.push_back(hi);
    } else if (method == "wngrad") {
      rec.alpha_min.push_back(1.0 / st.accum.maxCoeff());
      rec.alpha_max.push_back(1.0 / st.accum.minCoeff());
    } else {
      rec.alpha_min.push_back(st.alpha);
      rec.alpha_max.push_back(st.alpha);
    }
  }
  if (rec.steps() < horizon)
    rec.grad_sq_coord.conservativeResize(rec.steps(), d);
  return rec;
}

}  // namespace metareg
