#include "metareg/solver.hpp"

#include <cmath>
#include <limits>

namespace metareg {

double solve_monotone(const RootProblem& p) {
  double lo = p.lo, hi = p.hi;
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw std::invalid_argument("solve_monotone: bracket must satisfy 0 < lo < hi");

  double flo = p.residual(lo);
  if (flo > 0.0)
    throw NoRootError("solve_monotone: residual already positive at the bracket start");
  if (flo == 0.0) return lo;

  double fhi = p.residual(hi);
  for (int k = 0; fhi < 0.0; ++k) {
    if (k >= p.max_expand)
      throw NoRootError("solve_monotone: no sign change after " +
                        std::to_string(p.max_expand) + " bracket doublings");
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = p.residual(hi);
  }
  if (fhi == 0.0) return hi;

  /* safeguarded: keep [lo, hi] with f(lo) < 0 < f(hi); Newton steps are taken
     only when they land strictly inside the bracket */
  double x = 0.5 * (lo + hi);
  double best_x = x;
  double best_f = std::numeric_limits<double>::infinity();
  for (int it = 0; it < p.max_iter; ++it) {
    double fx = p.residual(x);
    if (std::abs(fx) < best_f) {
      best_f = std::abs(fx);
      best_x = x;
    }
    if (fx == 0.0) return x;
    if (p.tol_abs > 0.0 && std::abs(fx) <= p.tol_abs) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;

    double next = std::numeric_limits<double>::quiet_NaN();
    if (p.derivative) {
      double d = p.derivative(x);
      if (std::isfinite(d) && d > 0.0) {
        double cand = x - fx / d;
        if (cand > lo && cand < hi) next = cand;
      }
    }
    if (!(next == next)) next = 0.5 * (lo + hi);
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (next == lo || next == hi) {
      /* bracket exhausted at floating-point resolution */
      double fl = p.residual(lo), fh = p.residual(hi);
      return std::abs(fl) <= std::abs(fh) ? lo : hi;
    }
    x = next;
  }
  throw ConvergenceError("solve_monotone: no convergence in " +
                             std::to_string(p.max_iter) + " iterations",
                         best_x);
}

namespace {

void check_rate_args(double anchor, double g_sq, const char* who) {
  if (!(anchor > 0.0) || !std::isfinite(anchor))
    throw std::invalid_argument(std::string(who) + ": rate anchor must be positive finite");
  if (!(g_sq >= 0.0) || !std::isfinite(g_sq))
    throw std::invalid_argument(std::string(who) + ": g_sq must be nonnegative finite");
}

}  // namespace

double solve_exact_rate(const DivergenceSpec& spec, double eta, double g_sq) {
  check_rate_args(eta, g_sq, "solve_exact_rate");
  if (g_sq < 1e-300) return eta;

  /* beta = 1/alpha; beta^2 phi'(beta/beta_t) - g_sq is increasing on
     [beta_t, inf) and negative at beta_t */
  const double bt = 1.0 / eta;
  RootProblem rp;
  rp.residual = [&spec, bt, g_sq](double b) {
    return b * b * spec.phi_prime(b / bt) - g_sq;
  };
  if (spec.phi_double_prime) {
    rp.derivative = [&spec, bt](double b) {
      double z = b / bt;
      return 2.0 * b * spec.phi_prime(z) +
             (b * b / bt) * spec.phi_double_prime(z);
    };
  }
  rp.lo = bt;
  rp.hi = 2.0 * bt;
  double beta = solve_monotone(rp);
  double alpha = 1.0 / beta;
  return alpha < eta ? alpha : eta;
}

double solve_sc_exact_rate(const DivergenceSpec& spec, double alpha_t,
                           double g_sq, double lambda) {
  check_rate_args(alpha_t, g_sq, "solve_sc_exact_rate");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("solve_sc_exact_rate: lambda must be positive finite");
  if (g_sq < 1e-300) return alpha_t;

  const double bt = 1.0 / alpha_t;
  RootProblem rp;
  rp.residual = [&spec, bt, g_sq, lambda](double b) {
    return lambda * (b * b / bt) * spec.phi_prime(b / bt) - g_sq;
  };
  if (spec.phi_double_prime) {
    rp.derivative = [&spec, bt, lambda](double b) {
      double z = b / bt;
      return lambda * (2.0 * (b / bt) * spec.phi_prime(z) +
                       (b * b / (bt * bt)) * spec.phi_double_prime(z));
    };
  }
  rp.lo = bt;
  rp.hi = 2.0 * bt;
  double beta = solve_monotone(rp);
  double alpha = 1.0 / beta;
  return alpha < alpha_t ? alpha : alpha_t;
}

}  // namespace metareg
