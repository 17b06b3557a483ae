#pragma once

// Small counter-friendly generator. std::uniform_*_distribution output
// differs between standard libraries, so every draw that ends up in a
// document goes through this instead.

#include <cstddef>
#include <cstdint>

namespace mvplan {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from (seed, counter). Used for
// per-replicate and per-segment seeding so results do not depend on the
// order in which work is scheduled.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  SplitMix64 a(seed ^ 0x6A09E667F3BCC909ULL);
  const std::uint64_t base = a.next();
  SplitMix64 b(base + counter * 0xD1B54A32D192ED03ULL);
  return b.next();
}

// FNV-1a, for turning string ids into stream counters.
inline std::uint64_t fnv1a64(const char* data, std::size_t size) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace mvplan
