#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mlindex {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. Distinct tasks derive distinct streams from a
// root seed and a path of indices; streams are never shared between tasks.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : gen_(seed) {}

  static RngStream derive(uint64_t root, std::initializer_list<uint64_t> path) {
    uint64_t h = splitmix64(root ^ 0x6d6c696e64657831ULL);
    for (uint64_t x : path) h = splitmix64(h ^ splitmix64(x));
    return RngStream(h);
  }

  uint64_t next_u64() { return gen_(); }

  // Uniform value in [0, n) by rejection; n >= 1.
  uint64_t bounded(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mlindex
