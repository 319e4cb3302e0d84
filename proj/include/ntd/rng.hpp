#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ntd {

/// Seeded RNG with hand-rolled distributions. std::normal_distribution and
/// friends are implementation-defined, which would break the bit-for-bit
/// reproducibility contract; the raw mt19937_64 stream is portable, so all
/// value mapping happens here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n). Multiply-shift mapping; the bias is
  /// O(n / 2^64) and irrelevant at this scale.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  /// N(mean, stddev^2) via Box-Muller. Caches the spare deviate.
  double normal(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ntd
