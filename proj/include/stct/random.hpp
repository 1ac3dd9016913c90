#pragma once

#include <cstdint>
#include <random>

namespace stct {

using Rng = std::mt19937_64;

__extension__ typedef unsigned __int128 uint128_t;

/// SplitMix64 finalizer; maps (seed, stream) to a decorrelated child seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift with
/// rejection, so the result is unbiased.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  uint128_t m = static_cast<uint128_t>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<uint128_t>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace stct
