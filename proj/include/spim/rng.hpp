#pragma once

#include <cstdint>
#include <random>

namespace spim {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for sub-stream `stream` of `seed`. Distinct (seed, stream, tag) triples
// give statistically independent generators.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t tag = 0) noexcept {
  return mix_seed(mix_seed(seed ^ mix_seed(tag)) + stream);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t tag = 0) {
  return Rng{derive_seed(seed, stream, tag)};
}

}  // namespace spim
