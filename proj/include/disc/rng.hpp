#pragma once

#include <cstdint>
#include <random>

namespace disc {

// splitmix64; used to derive independent streams from (seed, tags).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                               std::uint64_t c = 0) {
  return mix64(mix64(mix64(seed ^ mix64(a)) ^ mix64(b)) ^ mix64(c));
}

/// Uniform double in [0, 1) as a pure function of the stream id.
inline double uniform01(std::uint64_t stream) {
  return static_cast<double>(mix64(stream) >> 11) * 0x1.0p-53;
}

/// Engine seeded from a derived stream; for multi-draw consumers.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
  return std::mt19937_64(substream(seed, a, b, c));
}

}  // namespace disc
