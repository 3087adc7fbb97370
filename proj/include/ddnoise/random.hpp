#pragma once

#include <cstdint>

namespace ddnoise {

/// Counter-based stream seed: a SplitMix64 mix of (master seed, stream index), so
/// stream i gets the same generator state no matter how work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ddnoise
