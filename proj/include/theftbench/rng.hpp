#pragma once

#include <cstdint>
#include <random>

namespace theftbench {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed for the `index`-th independent substream of `seed`:
//   derive_seed(seed, index) = mix64(mix64(seed) + index + 1)
// Every randomized routine that fans out over records, households or attack
// vectors draws substream i from derive_seed(seed, i), so results do not
// depend on evaluation order or parallel split.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed) { return Rng{mix64(seed)}; }

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng{derive_seed(seed, index)};
}

}  // namespace theftbench
