#pragma once

#include <cstdint>
#include <random>

namespace annealil {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; maps (base, stream) to a well-mixed seed so derived
/// streams stay independent even for consecutive integers.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace annealil
