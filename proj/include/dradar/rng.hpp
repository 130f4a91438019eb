#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>

#include "dradar/units.hpp"

namespace dradar {

// splitmix64 finalizer; used to turn structured seeds (master seed, run
// index) into well-mixed engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based seed derivation: the seed for stream `index` under a master
// seed. Streams are independent of evaluation order, so parallel consumers
// reproduce the serial results bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed ^ mix64(index));
}

// Deterministic Gaussian source. std::mt19937_64 output is specified by the
// standard, and the Box-Muller transform below avoids the
// implementation-defined algorithm of std::normal_distribution, so streams
// are reproducible across toolchains.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  // Uniform in (0,1] (never 0, so log() below is safe).
  double uniform_pos() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal pair via Box-Muller.
  std::pair<double, double> normal_pair() {
    const double u1 = uniform_pos();
    const double u2 = uniform_pos();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_gaussian(double variance) {
    const auto [re, im] = normal_pair();
    const double s = std::sqrt(variance / 2.0);
    return {s * re, s * im};
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dradar
