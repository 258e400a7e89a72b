#pragma once

#include <cstdint>
#include <random>

namespace skm1 {

/// SplitMix64 step; used to expand short seeds into full engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Engine for ensemble member `index` under `base_seed`. Member streams are
/// independent of scheduling order: path i always uses seed base_seed ^ i.
inline std::mt19937_64 member_rng(std::uint64_t base_seed, std::uint64_t index = 0) {
  std::uint64_t s = base_seed ^ index;
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s) >> 32),
                    static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace skm1
