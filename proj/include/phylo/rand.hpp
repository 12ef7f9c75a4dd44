#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace phylo {

// xoshiro256++ with splitmix64 seeding.  All stochastic code in the library
// draws through this generator so that results are reproducible across
// platforms and standard-library versions; none of the <random> distribution
// adaptors are used.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  // Derives an independent stream from (seed, a, b, c).  Used to give every
  // (site, branch) pair and every grid cell its own generator.
  static Rng stream(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = seed;
    h = splitmix64(h) ^ (a + 0x9e3779b97f4a7c15ULL);
    h = splitmix64(h) ^ (b + 0xbf58476d1ce4e5b9ULL);
    h = splitmix64(h) ^ (c + 0x94d049bb133111ebULL);
    return Rng(splitmix64(h));
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Strictly positive exponential variate.
  double exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be positive");
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return -std::log(u) / rate;
  }

  // Uniform integer in [0, n) without modulo bias (Lemire with rejection).
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    const uint64_t bound = static_cast<uint64_t>(n);
    while (true) {
      const uint64_t x = next();
      const __uint128_t m = static_cast<__uint128_t>(x) * bound;
      const uint64_t lo = static_cast<uint64_t>(m);
      if (lo >= bound || lo >= (-bound) % bound) return static_cast<int>(m >> 64);
    }
  }

  // Index drawn proportionally to nonnegative weights.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw std::invalid_argument("categorical: weights sum to zero");
    double u = uniform() * total;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
};

}  // namespace phylo
