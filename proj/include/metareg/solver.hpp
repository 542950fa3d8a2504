#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "metareg/divergence.hpp"

namespace metareg {

/* Scalar root problem for a nondecreasing residual. The initial bracket
   [lo, hi] is expanded upward (hi doubled, at most max_expand times) until it
   straddles the root; if the residual is still negative the problem has no
   root and solve_monotone throws NoRootError. */
struct RootProblem {
  std::function<double(double)> residual;
  std::function<double(double)> derivative;  // optional, enables Newton steps
  double lo = 0.0;
  double hi = 0.0;
  double tol_abs = 0.0;  // stop when |residual| <= tol_abs (0: bracket only)
  int max_expand = 64;
  int max_iter = 300;
};

class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* Convergence failure; carries the best iterate reached. */
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best)
      : std::runtime_error(what), best_iterate(best) {}
  double best_iterate;
};

/* Safeguarded bisection with optional Newton acceleration. Runs the bracket
   down to floating-point exhaustion unless tol_abs stops it earlier. */
double solve_monotone(const RootProblem& p);

/* Rate update of the exact rule: the alpha in (0, eta] solving
     phi'(eta / alpha) = alpha^2 g_sq.
   Solved in beta = 1/alpha space where beta^2 phi'(beta/beta_t) - g_sq is
   increasing. g_sq below 1e-300 returns eta unchanged. */
double solve_exact_rate(const DivergenceSpec& spec, double eta, double g_sq);

/* Rate update of the flat (strongly convex) exact rule: alpha solving
     lambda (alpha_t / alpha^2) phi'(alpha_t / alpha) = g_sq. */
double solve_sc_exact_rate(const DivergenceSpec& spec, double alpha_t,
                           double g_sq, double lambda);

}  // namespace metareg
