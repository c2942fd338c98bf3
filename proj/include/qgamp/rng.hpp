#pragma once

#include <cstdint>
#include <random>

namespace qgamp {

/// Derives an independent substream key from a base seed and two counters.
/// The mix is splitmix64-style so sweeps can draw per-trial streams in any
/// order (or in parallel) and still reproduce exactly.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// mt19937_64 with hand-rolled uniform/normal transforms. The standard
/// engine is bit-exact across platforms; std::normal_distribution is not,
/// so Box-Muller is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal();

  /// X ~ N(mean, variance).
  double normal(double mean, double variance);

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace qgamp
