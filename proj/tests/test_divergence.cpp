#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "metareg/divergence.hpp"

using namespace metareg;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

/* inverse round-trip grid; wngrad's branch only covers ratios up to 2 */
void check_inverse_roundtrip(const DivergenceSpec& spec) {
  double zmax = spec.name == "wngrad" ? 2.0 : 100.0;
  for (double z = 1.0; z <= zmax; z += (zmax - 1.0) / 64.0) {
    double y = spec.phi_prime(z);
    REQUIRE(spec.in_inverse_domain(y));
    double back = spec.phi_prime_inverse(y);
    CHECK(back == doctest::Approx(z).epsilon(1e-10));
  }
}

void check_generator_identities(const DivergenceSpec& spec) {
  CHECK(spec.phi(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(spec.phi_prime(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  double prev = -1e300;
  for (double z : {1.0, 1.0 + 1e-3, 1.25, 1.5, 1.9, 2.0}) {
    CHECK(spec.phi(z) >= -1e-15);  // convex with min 0 at 1
    double p = spec.phi_prime(z);
    CHECK(p >= prev - 1e-13);
    prev = p;
    /* phi' against a centered difference of phi */
    double h = 1e-6;
    double fd = (spec.phi(z + h) - spec.phi(z - h)) / (2 * h);
    CHECK(p == doctest::Approx(fd).epsilon(1e-6));
    if (spec.phi_double_prime) {
      double fd2 = (spec.phi_prime(z + h) - spec.phi_prime(z - h)) / (2 * h);
      CHECK(spec.phi_double_prime(z) == doctest::Approx(fd2).epsilon(1e-5));
    }
  }
}

}  // namespace

TEST_CASE("builtin registry") {
  const auto& names = builtin_divergences();
  REQUIRE(names.size() == 6);
  for (const std::string& n :
       {"kl", "rkl", "hellinger", "chi2", "adagrad", "wngrad"}) {
    DivergenceSpec spec = make_builtin(n);
    CHECK(spec.name == n);
    check_generator_identities(spec);
    check_inverse_roundtrip(spec);
  }
  CHECK_THROWS_AS(make_builtin("nope"), std::invalid_argument);
}

TEST_CASE("kl values") {
  DivergenceSpec kl = make_builtin("kl");
  CHECK(kl.phi(2.0) == doctest::Approx(2 * std::log(2.0) - 1.0).epsilon(1e-15));
  CHECK(kl.phi_prime(2.0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(kl.phi_prime_inverse(1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(kl.l == 1.0);
  CHECK(kl.gamma(2.0) == doctest::Approx(0.5).epsilon(1e-15));  // inf 1/z on [1,2]
  CHECK(std::isinf(kl.phi_prime_sup));
}

TEST_CASE("rkl values") {
  DivergenceSpec rkl = make_builtin("rkl");
  CHECK(rkl.phi_prime(2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rkl.phi_prime_inverse(0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rkl.phi_prime_sup == 1.0);
  CHECK(!rkl.sup_attained);
  CHECK(!rkl.in_inverse_domain(1.0));
  CHECK_THROWS_AS(rkl.phi_prime_inverse(1.0), std::domain_error);
  CHECK(rkl.gamma(2.0) == doctest::Approx(0.25).epsilon(1e-15));  // 1/z^2 at 2
  CHECK(rkl.l == 1.0);
}

TEST_CASE("hellinger values") {
  DivergenceSpec h = make_builtin("hellinger");
  CHECK(h.phi_prime(4.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h.phi_prime_inverse(0.5) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(h.phi_prime_sup == 1.0);
  CHECK(h.l == 0.5);
  /* phi'' = z^{-3/2}/2, decreasing */
  CHECK(h.gamma(4.0) == doctest::Approx(0.5 * std::pow(4.0, -1.5)).epsilon(1e-14));
}

TEST_CASE("chi2 values") {
  DivergenceSpec c = make_builtin("chi2");
  CHECK(c.phi(3.0) == doctest::Approx(4.0).epsilon(1e-15));  // (z-1)^2
  CHECK(c.phi_prime(3.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(c.phi_prime_inverse(1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(c.l == 2.0);
  CHECK(c.gamma(100.0) == doctest::Approx(2.0).epsilon(1e-15));  // constant phi''
  CHECK(std::isinf(c.phi_prime_sup));
}

TEST_CASE("adagrad values") {
  DivergenceSpec a = make_builtin("adagrad");
  CHECK(a.phi_prime(2.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(a.phi_prime_inverse(0.75) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(a.phi_prime_sup == 1.0);
  CHECK(!a.sup_attained);
  CHECK(a.l == 2.0);
  CHECK(a.gamma(2.0) == doctest::Approx(0.25).epsilon(1e-15));  // 2/z^3 at 2
}

TEST_CASE("wngrad branch") {
  DivergenceSpec w = make_builtin("wngrad");
  CHECK(w.phi_prime(2.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w.phi_prime_sup == 0.25);
  CHECK(w.sup_attained);  // branch endpoint z=2 is usable
  CHECK(w.phi_prime_inverse(0.25) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(w.in_inverse_domain(0.25));
  CHECK(!w.in_inverse_domain(0.2500001));
  CHECK_THROWS_AS(w.phi_prime_inverse(0.3), std::domain_error);
  CHECK(w.l == 1.0);  // phi'' = (2-z)/z^3 peaks at z=1
}

TEST_CASE("d_phi and sc_distance") {
  DivergenceSpec kl = make_builtin("kl");
  /* D(u=1, v=2) = phi(2)/2 = (2 ln 2 - 1)/2 */
  CHECK(d_phi(kl, vec1(1.0), vec1(2.0)) ==
        doctest::Approx(0.1931471805599453).epsilon(1e-15));
  CHECK(sc_distance(kl, vec1(1.0), vec1(2.0)) ==
        doctest::Approx(2 * std::log(2.0) - 1.0).epsilon(1e-15));
  CHECK(d_phi(kl, vec1(2.0), vec1(2.0)) == doctest::Approx(0.0));

  Vec u(2), v(2);
  u << 1.0, 1.0;
  v << 2.0, 2.0;
  CHECK(d_phi(kl, u, v) == doctest::Approx(2 * 0.1931471805599453).epsilon(1e-15));
  CHECK_THROWS_AS(d_phi(kl, vec1(0.0), vec1(1.0)), std::domain_error);
  CHECK_THROWS_AS(d_phi(kl, vec1(-1.0), vec1(1.0)), std::domain_error);
  CHECK_THROWS_AS(d_phi(kl, u, vec1(1.0)), std::invalid_argument);
}

TEST_CASE("custom divergence with explicit pieces") {
  CustomDivergence def;
  def.name = "chi2_copy";
  def.phi = [](double z) { return (z - 1) * (z - 1); };
  def.phi_prime = [](double z) { return 2 * (z - 1); };
  def.phi_double_prime = [](double) { return 2.0; };
  def.phi_prime_inverse = [](double y) { return y / 2 + 1; };
  def.gamma = [](double) { return 2.0; };
  def.l = 2.0;
  DivergenceSpec spec = make_custom(def);
  CHECK(spec.phi_prime_inverse(1.0) == doctest::Approx(1.5));
  check_generator_identities(spec);
}

TEST_CASE("custom divergence with derived inverse and gamma") {
  CustomDivergence def;
  def.name = "kl_copy";
  def.phi = [](double z) { return z * std::log(z) - z + 1; };
  def.phi_prime = [](double z) { return std::log(z); };
  def.phi_double_prime = [](double z) { return 1.0 / z; };
  def.l = 1.0;
  DivergenceSpec spec = make_custom(def);
  /* bisection fallback must match the analytic inverse */
  for (double y : {0.1, 0.5, 1.0, 3.0})
    CHECK(spec.phi_prime_inverse(y) == doctest::Approx(std::exp(y)).epsilon(1e-9));
  /* gamma fallback samples phi''; min of 1/z on [1,4] is 1/4 */
  CHECK(spec.gamma(4.0) > 0.0);
  CHECK(spec.gamma(4.0) <= 0.25 * 1.01);
}

TEST_CASE("custom divergence rejects broken generators") {
  CustomDivergence bad;
  bad.name = "shifted";
  bad.phi = [](double z) { return z; };  // phi(1) = 1 != 0
  bad.phi_prime = [](double) { return 1.0; };
  bad.l = 1.0;
  CHECK_THROWS_AS(make_custom(bad), std::invalid_argument);

  CustomDivergence dec;
  dec.name = "decreasing";
  dec.phi = [](double z) { return -(z - 1) * (z - 1); };
  dec.phi_prime = [](double z) { return -2 * (z - 1); };
  dec.l = 2.0;
  CHECK_THROWS_AS(make_custom(dec), std::invalid_argument);
}
