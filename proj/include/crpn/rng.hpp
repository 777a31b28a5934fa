#pragma once

#include <cstdint>
#include <random>

namespace crpn {

/// Deterministic random helpers on top of mt19937_64. std::*_distribution is
/// implementation-defined, so draws are spelled out here to keep outputs
/// byte-reproducible across library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one value per call; the pair's second
  /// half is cached).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace crpn
