#pragma once

#include <cstdint>
#include <random>

namespace cicam {

using Rng = std::mt19937_64;

// Mixes a base seed with a stream id so sub-streams (per-sample, per-epoch)
// are decorrelated but still a pure function of the base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

}  // namespace cicam
