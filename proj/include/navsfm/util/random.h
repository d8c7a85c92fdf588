#pragma once

#include <cstdint>
#include <random>

namespace navsfm {

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic engine for one (seed, stream, key...) tuple so that results do
// not depend on evaluation order or thread count.
inline std::mt19937_64 StreamEngine(uint64_t seed, uint64_t stream,
                                    uint64_t a = 0, uint64_t b = 0) {
  uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ stream);
  h = SplitMix64(h ^ a);
  h = SplitMix64(h ^ b);
  return std::mt19937_64(h);
}

}  // namespace navsfm
