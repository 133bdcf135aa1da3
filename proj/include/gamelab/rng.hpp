#pragma once

#include <cstdint>
#include <random>

namespace gamelab {

// Seeded random stream with hand-rolled distributions. std::mt19937_64 output
// is pinned by the standard, but the std:: distributions are not, and corpus
// files must be byte-identical across compilers for a given seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed == 0 ? 0x9e3779b97f4a7c15ull : seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(next_u64());  // full range
    const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return lo + static_cast<int64_t>(r % span);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  // Standard normal via Box-Muller; deterministic, keeps the spare draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform_real();
    } while (u1 <= 0.0);
    u2 = uniform_real();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Derives an independent stream seed from (master, index); splitmix64 mix.
  static uint64_t derive(uint64_t master, uint64_t index) {
    uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gamelab
