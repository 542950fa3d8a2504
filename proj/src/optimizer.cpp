#include "metareg/optimizer.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "metareg/solver.hpp"

namespace metareg {

RuleVariant parse_rule(const std::string& name) {
  if (name == "exact") return RuleVariant::exact;
  if (name == "alternating") return RuleVariant::alternating;
  if (name == "sc_exact") return RuleVariant::sc_exact;
  if (name == "sc_alternating") return RuleVariant::sc_alternating;
  if (name == "scalar_exact") return RuleVariant::scalar_exact;
  if (name == "scalar_alternating") return RuleVariant::scalar_alternating;
  throw std::invalid_argument("unknown rule: " + name);
}

std::string rule_name(RuleVariant rule) {
  switch (rule) {
    case RuleVariant::exact: return "exact";
    case RuleVariant::alternating: return "alternating";
    case RuleVariant::sc_exact: return "sc_exact";
    case RuleVariant::sc_alternating: return "sc_alternating";
    case RuleVariant::scalar_exact: return "scalar_exact";
    case RuleVariant::scalar_alternating: return "scalar_alternating";
  }
  throw std::invalid_argument("unknown rule variant");
}

bool rule_is_scalar(RuleVariant rule) {
  return rule == RuleVariant::scalar_exact ||
         rule == RuleVariant::scalar_alternating;
}

bool rule_is_sc(RuleVariant rule) {
  return rule == RuleVariant::sc_exact || rule == RuleVariant::sc_alternating;
}

namespace {

void validate_config(const OptimizerConfig& cfg) {
  if (!(cfg.alpha0 > 0.0) || !std::isfinite(cfg.alpha0))
    throw std::invalid_argument("optimizer: alpha0 must be positive finite");
  if (!(cfg.clip_factor > 0.0) || cfg.clip_factor > 1.0)
    throw std::invalid_argument("optimizer: clip_factor must be in (0,1]");
  if (rule_is_sc(cfg.rule) && (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)))
    throw std::invalid_argument("optimizer: lambda must be positive finite");
  if (!cfg.divergence.phi_prime)
    throw std::invalid_argument("optimizer: divergence is not initialized");
}

}  // namespace

OptimizerState init_state(const OptimizerConfig& cfg, const Vec& x0) {
  validate_config(cfg);
  if (x0.size() < 1) throw std::invalid_argument("init_state: empty start point");
  OptimizerState st;
  st.x = x0;
  st.alpha = Vec::Constant(rule_is_scalar(cfg.rule) ? 1 : x0.size(), cfg.alpha0);
  st.t = 0;
  return st;
}

Vec apply_growth_clip(const Vec& alpha_prev, const Vec& alpha_next,
                      double clip_factor, StepDiagnostics* diag) {
  if (alpha_prev.size() != alpha_next.size())
    throw std::invalid_argument("apply_growth_clip: size mismatch");
  if (!(clip_factor > 0.0) || clip_factor > 1.0)
    throw std::invalid_argument("apply_growth_clip: clip_factor must be in (0,1]");
  Vec out = alpha_next;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    double floor = clip_factor * alpha_prev[j];
    if (out[j] < floor) {
      out[j] = floor;
      if (diag) ++diag->clip_hits;
    }
  }
  return out;
}

Vec project_rate_box(const Vec& alpha, const RateBox& box) {
  if (box.lo.size() != alpha.size() || box.hi.size() != alpha.size())
    throw std::invalid_argument("project_rate_box: size mismatch");
  Vec out = alpha;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (!(box.lo[j] > 0.0) || !(box.hi[j] >= box.lo[j]))
      throw std::invalid_argument("project_rate_box: need 0 < lo <= hi");
    out[j] = std::min(std::max(out[j], box.lo[j]), box.hi[j]);
  }
  return out;
}

void step(OptimizerState& st, const Vec& grad, const OptimizerConfig& cfg) {
  validate_config(cfg);
  if (grad.size() != st.x.size())
    throw std::invalid_argument("step: gradient dimension mismatch");
  if (!grad.allFinite()) throw std::invalid_argument("step: non-finite gradient");

  const bool scalar = rule_is_scalar(cfg.rule);
  const Eigen::Index m = scalar ? 1 : grad.size();
  if (st.alpha.size() != m)
    throw std::invalid_argument("step: state alpha has wrong length");

  double eta_t = std::numeric_limits<double>::quiet_NaN();
  if (!cfg.eta_override.empty()) {
    if (st.t >= static_cast<long>(cfg.eta_override.size()))
      throw std::invalid_argument("step: eta schedule exhausted");
    eta_t = cfg.eta_override[st.t];
    if (!(eta_t > 0.0) || !std::isfinite(eta_t))
      throw std::invalid_argument("step: eta schedule entries must be positive");
  }

  const DivergenceSpec& spec = cfg.divergence;
  Vec next(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double a = st.alpha[j];
    const double eta = cfg.eta_override.empty() ? a : eta_t;
    const double g2 = scalar ? grad.squaredNorm() : grad[j] * grad[j];
    double v;
    switch (cfg.rule) {
      case RuleVariant::exact:
      case RuleVariant::scalar_exact:
        v = solve_exact_rate(spec, eta, g2);
        break;
      case RuleVariant::alternating:
      case RuleVariant::scalar_alternating: {
        double y = eta * eta * g2;
        if (!spec.in_inverse_domain(y)) {
          v = cfg.clip_factor * a;
          ++st.diag.domain_clips;
        } else {
          v = eta / spec.phi_prime_inverse(y);
        }
        break;
      }
      case RuleVariant::sc_exact:
        v = solve_sc_exact_rate(spec, a, g2, cfg.lambda);
        break;
      case RuleVariant::sc_alternating: {
        double y = a * g2 / cfg.lambda;
        if (!spec.in_inverse_domain(y)) {
          v = cfg.clip_factor * a;
          ++st.diag.domain_clips;
        } else {
          v = a / spec.phi_prime_inverse(y);
        }
        break;
      }
      default:
        throw std::invalid_argument("step: unknown rule");
    }
    next[j] = v;
  }

  next = apply_growth_clip(st.alpha, next, cfg.clip_factor, &st.diag);
  if (cfg.rate_box) next = project_rate_box(next, *cfg.rate_box);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (next[j] < 1e-300) {
      next[j] = 1e-300;
      ++st.diag.floor_hits;
    }
  }

  if (scalar)
    st.x -= next[0] * grad;
  else
    st.x.array() -= next.array() * grad.array();
  st.alpha = next;
  ++st.t;
}

RunRecord run(const OptimizerConfig& cfg, const ProblemInstance& problem,
              long horizon, std::uint64_t seed) {
  validate_config(cfg);
  if (horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");

  const int d = problem.dim();
  const bool online = problem.stream.batch_size > 0;
  std::optional<OnlineStream> stream;
  if (online) stream.emplace(problem, problem.stream.batch_size, horizon, seed);

  Vec x0 = problem.x0.size() == d ? problem.x0 : Vec::Zero(d);
  Vec xstar = online ? stream->comparator() : optimum(problem);
  double fstar_full = online ? 0.0 : loss(problem, xstar);

  RunRecord rec;
  rec.method = "meta";
  rec.divergence = cfg.divergence.name;
  rec.rule = rule_name(cfg.rule);
  rec.alpha0 = cfg.alpha0;
  rec.lambda = cfg.lambda;
  rec.clip_factor = cfg.clip_factor;
  rec.gamma_at_clip = cfg.divergence.gamma
                          ? cfg.divergence.gamma(1.0 / cfg.clip_factor)
                          : std::numeric_limits<double>::quiet_NaN();
  rec.phi_l = cfg.divergence.l;
  rec.seed = seed;
  rec.dim = d;
  rec.batch = online ? problem.stream.batch_size : 0;
  rec.horizon = horizon;
  rec.x_start = x0;
  rec.x_star = xstar;
  rec.mu_min = mu_min_of(problem);
  rec.loss.reserve(horizon);
  rec.grad_sq_coord.resize(horizon, d);

  OptimizerState st = init_state(cfg, x0);
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

    step(st, g, cfg);
    rec.alpha_min.push_back(st.alpha.minCoeff());
    rec.alpha_max.push_back(st.alpha.maxCoeff());
  }
  if (rec.steps() < horizon)
    rec.grad_sq_coord.conservativeResize(rec.steps(), d);

  rec.clip_hits = st.diag.clip_hits;
  rec.domain_clips = st.diag.domain_clips;
  rec.floor_hits = st.diag.floor_hits;
  return rec;
}

}  // namespace metareg
