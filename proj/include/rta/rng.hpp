#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "rta/math.hpp"

namespace rta {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based split so parallel consumers get independent, reproducible
// streams from one root seed.
inline uint64_t derive_seed(uint64_t root, uint64_t index) {
  uint64_t s = root ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  const uint64_t a = splitmix64(s);
  const uint64_t b = splitmix64(s);
  return a ^ (b << 1) ^ (b >> 63);
}

// mt19937_64 output is pinned by the standard; the distribution shaping here
// is hand-rolled so streams are identical across platforms and compilers.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  uint64_t below(uint64_t n) {
    const uint64_t max = std::numeric_limits<uint64_t>::max();
    const uint64_t limit = max - max % n;
    uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return rad * std::cos(kTwoPi * u2);
  }

  // Uniform over the rotation group (normalized 4-vector of gaussians).
  Quaternion unit_quaternion() {
    for (;;) {
      const Quaternion q{gaussian(), gaussian(), gaussian(), gaussian()};
      const double n = q.norm();
      if (n > 1e-6) return {q.q1 / n, q.q2 / n, q.q3 / n, q.q4 / n};
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rta
