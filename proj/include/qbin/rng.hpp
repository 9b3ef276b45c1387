#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qbin {

/// Seeded generator with platform-independent output. The engine is fully
/// specified by the standard; the variate transforms are done here rather than
/// through <random> distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_positive() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  /// Exponential with the given rate, by inversion of 1 - e^{-rate x}.
  double exponential(double rate) { return -std::log(uniform_positive()) / rate; }

  /// Standard normal via the Box-Muller transform; the second variate of each
  /// pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_positive()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qbin
