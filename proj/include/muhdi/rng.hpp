#pragma once

#include <cstdint>
#include <random>

namespace muhdi {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return splitmix64(a ^ splitmix64(b)); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  return splitmix64(mix_seed(a, b) ^ splitmix64(c ^ 0x6a09e667f3bcc909ULL));
}

// Deterministic RNG. The engine (mt19937_64) is fully specified by the C++
// standard; the distributions below are hand-rolled because the std
// distribution adaptors are implementation-defined and would break
// cross-platform reproducibility of generated data and initial weights.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed ^ 0x243f6a8885a308d3ULL)) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive, rejection-sampled (no modulo bias).
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<int64_t>(next_u64());
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % range);
  }

  // Approximate standard normal: sum of 12 uniforms minus 6. Pure IEEE
  // add/sub, so bit-stable everywhere; tails truncate at +-6 sigma which is
  // irrelevant for weight init and pixel noise.
  double gauss() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace muhdi
