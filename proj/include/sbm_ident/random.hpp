#pragma once

#include <cstdint>
#include <random>

namespace sbm_ident {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replicate `i` of a run seeded with `seed`:
/// seed_i = splitmix64(splitmix64(seed) ^ i).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i) {
  return splitmix64(splitmix64(seed) ^ i);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace sbm_ident
