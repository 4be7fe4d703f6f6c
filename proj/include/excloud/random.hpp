#pragma once

// Random streams. Every replicate and every Poisson stream draws from its own
// std::mt19937_64 whose seed is derived from (base seed, stream id) by
// SplitMix64 mixing. Variates are produced from raw 64-bit words here rather
// than through <random> distributions, whose algorithms are unspecified.

#include <cmath>
#include <cstdint>
#include <random>

namespace excloud {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream` under base seed `seed`.
inline constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(~stream));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(stream_seed(seed, stream)) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() { return double((engine_() >> 11) + 1) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

  /// Number of failures before the first success, success probability p.
  std::int64_t geometric(double p) {
    if (p >= 1.0) return 0;
    return std::int64_t(std::floor(std::log(uniform_open0()) / std::log1p(-p)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace excloud
