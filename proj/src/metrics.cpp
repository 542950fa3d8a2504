#include "metareg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace metareg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_meta(const RunRecord& rec) { return rec.method == "meta"; }

void require_trace(const RunRecord& rec, const char* who) {
  const size_t T = rec.loss.size();
  if (T == 0) throw std::invalid_argument(std::string(who) + ": empty record");
  if (rec.loss_star.size() != T || rec.grad_sq_norm.size() != T ||
      rec.grad_inf.size() != T || rec.dist_inf.size() != T ||
      static_cast<size_t>(rec.grad_sq_coord.rows()) != T)
    throw std::invalid_argument(std::string(who) + ": inconsistent trace lengths");
}

}  // namespace

std::vector<double> regret_curve(const RunRecord& rec) {
  const size_t T = rec.loss.size();
  if (rec.loss_star.size() != T)
    throw std::invalid_argument("regret_curve: missing comparator losses");
  std::vector<double> out(T);
  double acc = 0.0;
  for (size_t t = 0; t < T; ++t) {
    acc += rec.loss[t] - rec.loss_star[t];
    out[t] = acc;
  }
  return out;
}

double min_grad_norm(const RunRecord& rec, long T) {
  long n = static_cast<long>(rec.grad_sq_norm.size());
  if (T >= 0 && T < n) n = T;
  if (n <= 0) throw std::invalid_argument("min_grad_norm: empty range");
  double m = rec.grad_sq_norm[0];
  for (long t = 1; t < n; ++t) m = std::min(m, rec.grad_sq_norm[t]);
  return m;
}

std::vector<double> bound_thm5_curve(const RunRecord& rec) {
  require_trace(rec, "bound_thm5");
  if (!is_meta(rec) || (rec.rule != "exact" && rec.rule != "alternating"))
    throw std::invalid_argument(
        "bound_thm5: needs a meta run with the exact or alternating rule");
  if (!(rec.gamma_at_clip > 0.0) || !std::isfinite(rec.gamma_at_clip))
    throw std::invalid_argument("bound_thm5: gamma at the clipped ratio domain is not positive");
  if (!(rec.alpha0 > 0.0) || !(rec.phi_l > 0.0))
    throw std::invalid_argument("bound_thm5: missing alpha0 or l");

  const size_t T = rec.loss.size();
  const int d = static_cast<int>(rec.grad_sq_coord.cols());
  const double d0sq = (rec.x_start - rec.x_star).squaredNorm();
  const bool exact = rec.rule == "exact";

  std::vector<double> out(T);
  Vec S = Vec::Zero(d);
  double Dmax = 0.0, Gmax = 0.0;
  for (size_t t = 0; t < T; ++t) {
    Dmax = std::max(Dmax, rec.dist_inf[t]);
    Gmax = std::max(Gmax, rec.grad_inf[t]);
    S += rec.grad_sq_coord.row(t).transpose();
    double sum_norm = 0.0;
    for (int j = 0; j < d; ++j) sum_norm += std::sqrt(S[j]);
    double c = exact ? std::sqrt(2.0 * rec.phi_l +
                                 4.0 * rec.alpha0 * rec.alpha0 * Gmax * Gmax)
                     : std::max(std::sqrt(2.0 * rec.phi_l),
                                2.0 * rec.alpha0 * Gmax);
    out[t] = 0.5 * ((1.0 + Dmax * Dmax / rec.gamma_at_clip) * c * sum_norm +
                    d0sq / rec.alpha0);
  }
  return out;
}

double bound_thm5(const RunRecord& rec) { return bound_thm5_curve(rec).back(); }

std::vector<double> bound_log_curve(const RunRecord& rec) {
  require_trace(rec, "bound_log");
  if (!is_meta(rec) || (rec.rule != "sc_exact" && rec.rule != "sc_alternating"))
    throw std::invalid_argument("bound_log: needs a meta run with a flat (sc) rule");
  if (!(rec.lambda > 0.0) || !(rec.alpha0 > 0.0) || !(rec.phi_l > 0.0))
    throw std::invalid_argument("bound_log: missing lambda, alpha0 or l");

  const size_t T = rec.loss.size();
  const int d = static_cast<int>(rec.grad_sq_coord.cols());
  const double d0sq = (rec.x_start - rec.x_star).squaredNorm();
  const double ll = rec.lambda * rec.phi_l;
  const bool squared_prefactor = rec.rule == "sc_exact";

  std::vector<double> out(T);
  Vec S = Vec::Zero(d);
  double Gmax = 0.0;
  for (size_t t = 0; t < T; ++t) {
    Gmax = std::max(Gmax, rec.grad_inf[t]);
    S += rec.grad_sq_coord.row(t).transpose();
    double logsum = 0.0;
    for (int j = 0; j < d; ++j) logsum += std::log1p(rec.alpha0 * S[j] / ll);
    double pref = ll;
    if (squared_prefactor) {
      double f = 1.0 + rec.alpha0 * Gmax * Gmax / ll;
      pref *= f * f;
    }
    out[t] = 0.5 * (pref * logsum + d0sq / rec.alpha0);
  }
  return out;
}

double bound_log(const RunRecord& rec) { return bound_log_curve(rec).back(); }

double loglog_slope(const std::vector<double>& curve, long window) {
  const long T = static_cast<long>(curve.size());
  if (window < 1) throw std::invalid_argument("loglog_slope: window must be >= 1");
  long start = std::max<long>(0, T - window);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (long t = start; t < T; ++t) {
    if (!(curve[t] > 0.0)) continue;
    double x = std::log(static_cast<double>(t + 1));
    double y = std::log(curve[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return kNaN;
  double den = n * sxx - sx * sx;
  if (den <= 0.0) return kNaN;
  return (n * sxy - sx * sy) / den;
}

double lambda_floor(const ProblemInstance& p, const DivergenceSpec& spec,
                    double grad_inf_bound, double clip_factor) {
  if (!(grad_inf_bound > 0.0))
    throw std::invalid_argument("lambda_floor: gradient bound must be positive");
  if (!(clip_factor > 0.0) || clip_factor > 1.0)
    throw std::invalid_argument("lambda_floor: clip_factor must be in (0,1]");
  if (!spec.gamma) throw std::invalid_argument("lambda_floor: divergence has no gamma");
  double g = spec.gamma(1.0 / clip_factor);
  double mu = mu_min_of(p);
  if (!(g > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("lambda_floor: needs positive gamma and curvature");
  return grad_inf_bound * grad_inf_bound / (g * mu);
}

namespace {

nlohmann::ordered_json vec_json(const Vec& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::ordered_json series_json(const std::vector<double>& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string record_to_json(const RunRecord& rec) {
  nlohmann::ordered_json j;
  j["schema"] = "metareg-run-v1";
  j["config"] = rec.config;
  j["method"] = rec.method;
  j["divergence"] = rec.divergence;
  j["rule"] = rec.rule;
  j["alpha0"] = rec.alpha0;
  j["lambda"] = rec.lambda;
  j["clip_factor"] = rec.clip_factor;
  j["gamma_at_clip"] = rec.gamma_at_clip;
  j["phi_l"] = rec.phi_l;
  j["seed"] = rec.seed;
  j["dim"] = rec.dim;
  j["batch"] = rec.batch;
  j["horizon"] = rec.horizon;
  j["mu_min"] = rec.mu_min;
  j["x_start"] = vec_json(rec.x_start);
  j["x_star"] = vec_json(rec.x_star);
  nlohmann::ordered_json steps;
  steps["loss"] = series_json(rec.loss);
  steps["loss_star"] = series_json(rec.loss_star);
  steps["grad_sq_norm"] = series_json(rec.grad_sq_norm);
  steps["grad_inf"] = series_json(rec.grad_inf);
  steps["dist_inf"] = series_json(rec.dist_inf);
  steps["alpha_min"] = series_json(rec.alpha_min);
  steps["alpha_max"] = series_json(rec.alpha_max);
  j["steps"] = std::move(steps);
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (Eigen::Index c = 0; c < rec.grad_sq_coord.cols(); ++c)
    cols.push_back(vec_json(rec.grad_sq_coord.col(c)));
  j["grad_sq_coord"] = std::move(cols);
  nlohmann::ordered_json diag;
  diag["clip_hits"] = rec.clip_hits;
  diag["domain_clips"] = rec.domain_clips;
  diag["floor_hits"] = rec.floor_hits;
  diag["aborted"] = rec.aborted;
  diag["abort_reason"] = rec.abort_reason;
  j["diagnostics"] = std::move(diag);
  return j.dump();
}

void write_record_json(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_record_json: cannot open " + path);
  out << record_to_json(rec) << "\n";
}

void write_record_csv(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_record_csv: cannot open " + path);

  std::vector<double> regret = regret_curve(rec);
  std::vector<double> b5, blog;
  try {
    b5 = bound_thm5_curve(rec);
  } catch (const std::invalid_argument&) {
  }
  try {
    blog = bound_log_curve(rec);
  } catch (const std::invalid_argument&) {
  }

  out << "t,loss,grad_sq_norm,alpha_min,alpha_max,regret,bound_thm5,bound_log\n";
  for (size_t t = 0; t < rec.loss.size(); ++t) {
    out << (t + 1) << ',' << fmt_double(rec.loss[t]) << ','
        << fmt_double(rec.grad_sq_norm[t]) << ',' << fmt_double(rec.alpha_min[t])
        << ',' << fmt_double(rec.alpha_max[t]) << ',' << fmt_double(regret[t])
        << ',' << (b5.empty() ? "" : fmt_double(b5[t])) << ','
        << (blog.empty() ? "" : fmt_double(blog[t])) << "\n";
  }
}

}  // namespace metareg
