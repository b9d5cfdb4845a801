#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nued {

/// Deterministic random source: mt19937_64 stream with in-house value
/// transforms, so sampled sequences depend only on the seed (standard library
/// distributions are implementation-defined and would not be portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nued
