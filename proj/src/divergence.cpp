#include "metareg/divergence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "metareg/solver.hpp"

namespace metareg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inverse_arg(const DivergenceSpec* spec, double y, double sup,
                       bool attained, const char* name) {
  if (!(y >= 0.0) || y > sup || (y == sup && !attained)) {
    (void)spec;
    throw std::domain_error(std::string(name) +
                            ": phi' inverse argument out of range: y=" +
                            std::to_string(y));
  }
}

DivergenceSpec builtin_kl() {
  DivergenceSpec s;
  s.name = "kl";
  s.phi = [](double t) { return t * std::log(t) - t + 1.0; };
  s.phi_prime = [](double t) { return std::log(t); };
  s.phi_double_prime = [](double t) { return 1.0 / t; };
  s.phi_prime_sup = kInf;
  s.sup_attained = false;
  s.phi_prime_inverse = [](double y) {
    check_inverse_arg(nullptr, y, kInf, false, "kl");
    return std::exp(y);
  };
  s.gamma = [](double Z) { return 1.0 / Z; };
  s.l = 1.0;
  return s;
}

DivergenceSpec builtin_rkl() {
  DivergenceSpec s;
  s.name = "rkl";
  s.phi = [](double t) { return -std::log(t) + t - 1.0; };
  s.phi_prime = [](double t) { return 1.0 - 1.0 / t; };
  s.phi_double_prime = [](double t) { return 1.0 / (t * t); };
  s.phi_prime_sup = 1.0;
  s.sup_attained = false;
  s.phi_prime_inverse = [](double y) {
    check_inverse_arg(nullptr, y, 1.0, false, "rkl");
    return 1.0 / (1.0 - y);
  };
  s.gamma = [](double Z) { return 1.0 / (Z * Z); };
  s.l = 1.0;
  return s;
}

DivergenceSpec builtin_hellinger() {
  DivergenceSpec s;
  s.name = "hellinger";
  s.phi = [](double t) {
    double r = std::sqrt(t) - 1.0;
    return r * r;
  };
  s.phi_prime = [](double t) { return 1.0 - 1.0 / std::sqrt(t); };
  s.phi_double_prime = [](double t) { return 0.5 / (t * std::sqrt(t)); };
  s.phi_prime_sup = 1.0;
  s.sup_attained = false;
  s.phi_prime_inverse = [](double y) {
    check_inverse_arg(nullptr, y, 1.0, false, "hellinger");
    double r = 1.0 - y;
    return 1.0 / (r * r);
  };
  s.gamma = [](double Z) { return 0.5 / (Z * std::sqrt(Z)); };
  s.l = 0.5;
  return s;
}

DivergenceSpec builtin_chi2() {
  DivergenceSpec s;
  s.name = "chi2";
  s.phi = [](double t) { return (t - 1.0) * (t - 1.0); };
  s.phi_prime = [](double t) { return 2.0 * (t - 1.0); };
  s.phi_double_prime = [](double) { return 2.0; };
  s.phi_prime_sup = kInf;
  s.sup_attained = false;
  s.phi_prime_inverse = [](double y) {
    check_inverse_arg(nullptr, y, kInf, false, "chi2");
    return 0.5 * y + 1.0;
  };
  s.gamma = [](double) { return 2.0; };
  s.l = 2.0;
  return s;
}

DivergenceSpec builtin_adagrad() {
  DivergenceSpec s;
  s.name = "adagrad";
  s.phi = [](double t) { return t + 1.0 / t - 2.0; };
  s.phi_prime = [](double t) { return 1.0 - 1.0 / (t * t); };
  s.phi_double_prime = [](double t) { return 2.0 / (t * t * t); };
  s.phi_prime_sup = 1.0;
  s.sup_attained = false;
  s.phi_prime_inverse = [](double y) {
    check_inverse_arg(nullptr, y, 1.0, false, "adagrad");
    return 1.0 / std::sqrt(1.0 - y);
  };
  s.gamma = [](double Z) { return 2.0 / (Z * Z * Z); };
  s.l = 2.0;
  return s;
}

DivergenceSpec builtin_wngrad() {
  DivergenceSpec s;
  s.name = "wngrad";
  s.phi = [](double t) { return 1.0 / t + std::log(t) - 1.0; };
  s.phi_prime = [](double t) { return (t - 1.0) / (t * t); };
  s.phi_double_prime = [](double t) { return (2.0 - t) / (t * t * t); };
  /* phi' increases on [1,2] and decreases after; the inverse is taken on the
     [1,2] branch, closed at phi'(2) = 1/4 */
  s.phi_prime_sup = 0.25;
  s.sup_attained = true;
  s.phi_prime_inverse = [](double y) {
    check_inverse_arg(nullptr, y, 0.25, true, "wngrad");
    return 2.0 / (1.0 + std::sqrt(1.0 - 4.0 * y));
  };
  /* phi'' = (2-t)/t^3 decreases until t = 3 and stays negative past 2 */
  s.gamma = [](double Z) {
    double z = Z < 3.0 ? Z : 3.0;
    return (2.0 - z) / (z * z * z);
  };
  s.l = 1.0;
  return s;
}

void validate_generator(const DivergenceSpec& s) {
  static const double grid[] = {1.0,  1.0 + 1e-6, 1.0 + 1e-3, 1.5, 2.0,
                                5.0,  10.0,       100.0};
  if (std::abs(s.phi(1.0)) > 1e-10)
    throw std::invalid_argument(s.name + ": phi(1) must be 0");
  if (std::abs(s.phi_prime(1.0)) > 1e-10)
    throw std::invalid_argument(s.name + ": phi'(1) must be 0");
  double prev = -1e-12;
  for (double z : grid) {
    double p = s.phi(z), dp = s.phi_prime(z);
    if (!std::isfinite(p) || !std::isfinite(dp))
      throw std::invalid_argument(s.name + ": phi/phi' not finite on [1,100]");
    if (p < -1e-10)
      throw std::invalid_argument(s.name + ": phi must be nonnegative");
    if (dp < prev - 1e-10)
      throw std::invalid_argument(s.name + ": phi' must be nondecreasing");
    prev = dp;
  }
}

}  // namespace

const std::vector<std::string>& builtin_divergences() {
  static const std::vector<std::string> names = {"kl",   "rkl",     "hellinger",
                                                 "chi2", "adagrad", "wngrad"};
  return names;
}

DivergenceSpec make_builtin(const std::string& name) {
  if (name == "kl") return builtin_kl();
  if (name == "rkl") return builtin_rkl();
  if (name == "hellinger") return builtin_hellinger();
  if (name == "chi2") return builtin_chi2();
  if (name == "adagrad") return builtin_adagrad();
  if (name == "wngrad") return builtin_wngrad();
  throw std::invalid_argument("unknown divergence: " + name);
}

DivergenceSpec make_custom(const CustomDivergence& def) {
  if (def.name.empty()) throw std::invalid_argument("custom divergence needs a name");
  if (!def.phi || !def.phi_prime)
    throw std::invalid_argument(def.name + ": phi and phi_prime are required");
  if (!(def.l > 0.0) || !std::isfinite(def.l))
    throw std::invalid_argument(def.name + ": smoothness constant l must be positive");

  DivergenceSpec s;
  s.name = def.name;
  s.phi = def.phi;
  s.phi_prime = def.phi_prime;
  s.phi_double_prime = def.phi_double_prime;
  s.l = def.l;
  s.phi_prime_sup = def.phi_prime_sup;
  s.sup_attained = def.sup_attained;

  if (def.phi_prime_inverse) {
    s.phi_prime_inverse = def.phi_prime_inverse;
  } else {
    auto prime = def.phi_prime;
    double sup = def.phi_prime_sup;
    bool attained = def.sup_attained;
    std::string name = def.name;
    s.phi_prime_inverse = [prime, sup, attained, name](double y) {
      check_inverse_arg(nullptr, y, sup, attained, name.c_str());
      if (y == 0.0) return 1.0;
      RootProblem rp;
      rp.residual = [&prime, y](double z) { return prime(z) - y; };
      rp.lo = 1.0;
      rp.hi = 2.0;
      return solve_monotone(rp);
    };
  }

  if (def.gamma) {
    s.gamma = def.gamma;
  } else if (def.phi_double_prime) {
    auto pp = def.phi_double_prime;
    /* coarse sampled minimum over [1,Z]; supply gamma for tight bounds */
    s.gamma = [pp](double Z) {
      if (!(Z >= 1.0)) throw std::invalid_argument("gamma: Z must be >= 1");
      const int n = 256;
      double lo = pp(1.0);
      for (int i = 1; i <= n; ++i) {
        double z = std::exp(std::log(Z) * i / n);
        lo = std::min(lo, pp(z));
      }
      return lo;
    };
  }

  validate_generator(s);
  return s;
}

namespace {

void check_pair(const DivergenceSpec& spec, const Vec& u, const Vec& v) {
  if (u.size() != v.size())
    throw std::invalid_argument(spec.name + ": length mismatch " +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (!(u[j] > 0.0) || !(v[j] > 0.0))
      throw std::domain_error(spec.name +
                              ": divergence arguments must be strictly positive");
  }
}

}  // namespace

double d_phi(const DivergenceSpec& spec, const Vec& u, const Vec& v) {
  check_pair(spec, u, v);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j)
    acc += spec.phi(v[j] / u[j]) / v[j];
  return acc;
}

double sc_distance(const DivergenceSpec& spec, const Vec& u, const Vec& v) {
  check_pair(spec, u, v);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) acc += spec.phi(v[j] / u[j]);
  return acc;
}

}  // namespace metareg
