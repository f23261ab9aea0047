#pragma once

#include <cstdint>
#include <random>

namespace macopt {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for (stream, index) under one run seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(base) ^ stream) + index);
}

// Stream tags used with derive_seed.
inline constexpr std::uint64_t kLayoutStream = 1;
inline constexpr std::uint64_t kActionStream = 2;

}  // namespace macopt
