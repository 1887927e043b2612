#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace msdpool {

using Rng = std::mt19937_64;

// splitmix64 finalizer; stable across platforms, used to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed from a base seed and a path of indices.
/// Adding indices at the end never changes seeds derived from a prefix.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(base);
  for (auto index : path) h = mix64(h ^ mix64(index + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace msdpool
