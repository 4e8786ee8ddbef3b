#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "veq/vecmath.hpp"

namespace veq {

// mt19937_64 with hand-rolled distributions. std:: distributions are
// implementation-defined, which would break byte-identical reports across
// standard libraries; the raw engine output is pinned by the standard.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0,1) with 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t index(std::uint64_t n) {
    // rejection keeps the distribution exact
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  // standard normal via Box-Muller
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  Vec normal_vec(std::size_t n) {
    Vec v(n);
    for (auto& c : v) c = normal();
    return v;
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace veq
