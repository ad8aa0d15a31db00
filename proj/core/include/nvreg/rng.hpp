#pragma once

#include <cstdint>
#include <random>

namespace nvreg {

// splitmix64: fast, well-mixed stream suitable for seeding
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// independent generator for job `index` of a run seeded with `seed`;
// results depend only on (seed, index), never on scheduling
inline std::mt19937_64 job_rng(uint64_t seed, uint64_t index) {
  uint64_t s = seed ^ (0xd1342543de82ef95ULL * (index + 1));
  uint64_t a = splitmix64(s);
  uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32),
                    static_cast<uint32_t>(b), static_cast<uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// uniform integer in [0, n) without modulo bias
inline uint64_t uniform_index(std::mt19937_64& rng, uint64_t n) {
  uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

}  // namespace nvreg
