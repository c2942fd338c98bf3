#include "qgamp/rng.hpp"

#include <cmath>
#include <numbers>

namespace qgamp {

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  state ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  key ^= splitmix64(state);
  state ^= b * 0xda942042e4dd58b5ULL + 0x9e3779b97f4a7c15ULL;
  key ^= splitmix64(state);
  return key;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(angle);
  has_cached_ = true;
  return r * std::cos(angle);
}

double Rng::normal(double mean, double variance) {
  return mean + std::sqrt(variance) * normal();
}

}  // namespace qgamp
