#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace flatprox {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic substream seed from a root seed and a list of indices
/// (e.g. rho index, replication index). Independent of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(root);
  for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(root, path));
}

}  // namespace flatprox
