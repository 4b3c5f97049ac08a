#pragma once

#include <cstdint>
#include <random>

namespace sbridge {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent generator for stream `index` under `seed`. The engine seed is
/// splitmix64(splitmix64(seed) ^ index), so a particle's draws depend only on
/// (seed, index) and never on how particles are scheduled.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed) ^ index));
}

}  // namespace sbridge
