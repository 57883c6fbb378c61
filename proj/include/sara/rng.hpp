#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sara/core_types.hpp"

namespace sara {

/// SplitMix64 finalizer; used to derive independent per-DMA seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic random stream. The engine is std::mt19937_64 (fully
/// specified by the standard); distributions are computed here from raw bits
/// because the standard library's distributions are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection to stay unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

 private:
  std::mt19937_64 engine_;
};

/// Fresh stream for a master seed.
inline RandomStream seeded_rng(std::uint64_t seed) { return RandomStream(mix64(seed)); }

/// Per-generator stream split from the master seed by DmaId, so adding a DMA
/// does not perturb the others.
inline RandomStream seeded_rng(std::uint64_t seed, DmaId dma) {
  return RandomStream(mix64(mix64(seed) ^ mix64(0x5a5a0000ull + dma.value)));
}

}  // namespace sara
