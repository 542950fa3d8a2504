#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace metareg {

/* Deterministic RNG. mt19937_64 output is pinned by the standard; the normal
   and shuffle transforms are hand-rolled because std::normal_distribution and
   std::shuffle are implementation-defined and would break byte-identical
   reruns across toolchains. */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /* uniform in [0,1) with 53 random bits */
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /* Box-Muller, one spare value cached */
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /* uniform integer in [0, n) by rejection */
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  /* Fisher-Yates permutation of 0..n-1 */
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(uniform_index(static_cast<std::uint64_t>(i) + 1));
      int tmp = p[i];
      p[i] = p[j];
      p[j] = tmp;
    }
    return p;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace metareg
