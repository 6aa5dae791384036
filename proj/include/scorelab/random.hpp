#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace scorelab {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20180106;

/// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniformly random permutation of [0, n).
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace scorelab
