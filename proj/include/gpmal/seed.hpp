#pragma once

#include <cstddef>
#include <cstdint>

namespace gpmal {

/// Mixes a base seed with two indices (splitmix64 finaliser) so that
/// independent streams can be derived without sharing generator state.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::size_t a, std::size_t b) {
  std::uint64_t z = base ^ (0x9E3779B97F4A7C15ULL * (a + 1)) ^ (0xC2B2AE3D27D4EB4FULL * (b + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace gpmal
