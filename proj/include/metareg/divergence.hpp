#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace metareg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/* A divergence generator: convex phi on (0,inf) with phi(1) = phi'(1) = 0.
   It induces the coordinate-wise distance
     D_phi(u, v) = sum_j (1/v_j) phi(v_j / u_j)
   used to regularize learning-rate updates, and the flat variant
     D^sc(u, v)  = sum_j phi(v_j / u_j).

   The constants entering the regret/runtime bounds:
     gamma(Z) = inf of phi'' on [1, Z]   (ratio domain restricted by growth
                                          clipping, Z = 1/clip_factor)
     l        = sup of phi'' on [1, inf)
   gamma is kept as a function of Z because for several generators phi''
   decays and a single constant would be vacuous. */
struct DivergenceSpec {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  /* inverse of phi' restricted to z >= 1; argument domain [0, phi_prime_sup),
     closed at the right end iff sup_attained; throws std::domain_error
     outside */
  std::function<double(double)> phi_prime_inverse;
  std::function<double(double)> phi_double_prime;  // may be empty
  std::function<double(double)> gamma;
  double l = 0.0;
  double phi_prime_sup = 0.0;
  bool sup_attained = false;

  bool in_inverse_domain(double y) const {
    if (!(y >= 0.0)) return false;
    return y < phi_prime_sup || (sup_attained && y == phi_prime_sup);
  }
};

/* Builtins: kl, rkl, hellinger, chi2, adagrad, wngrad. */
const std::vector<std::string>& builtin_divergences();
DivergenceSpec make_builtin(const std::string& name);

/* User-supplied generator. phi and phi_prime are required together with the
   smoothness constant l; the rest is optional. A missing inverse falls back
   to monotone bisection on phi'; a missing gamma falls back to a sampled
   minimum of phi'' (coarse; supply gamma for tight bounds). Definition
   requirements (phi(1) = phi'(1) = 0, phi' nondecreasing) are checked on a
   sample grid at construction and violations throw std::invalid_argument. */
struct CustomDivergence {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  double l = 0.0;
  std::function<double(double)> phi_double_prime;
  std::function<double(double)> phi_prime_inverse;
  std::function<double(double)> gamma;
  double phi_prime_sup = std::numeric_limits<double>::infinity();
  bool sup_attained = false;
};
DivergenceSpec make_custom(const CustomDivergence& def);

/* D_phi(u, v); u, v strictly positive, same length. Throws std::domain_error
   on nonpositive entries and std::invalid_argument on length mismatch. */
double d_phi(const DivergenceSpec& spec, const Vec& u, const Vec& v);

/* Flat distance sum_j phi(v_j / u_j). */
double sc_distance(const DivergenceSpec& spec, const Vec& u, const Vec& v);

}  // namespace metareg
