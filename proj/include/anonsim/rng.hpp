#pragma once

#include <cstdint>
#include <vector>

#include "anonsim/common.hpp"

namespace anonsim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** with hand-rolled integer/real draws. The standard library
// engines are portable but its distributions are not; every draw here is
// pinned so that a seed fully determines simulation output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, n). Rejection sampling keeps the draw unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw Error("uniform_index: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index into `weights` with probability proportional to weight.
  std::size_t pick_weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw Error("pick_weighted: zero total weight");
    double x = uniform01() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      x -= weights[i];
      if (x < 0.0) return i;
    }
    return weights.size() - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Stream derivation for parallel trials: trial i always sees the same stream
// no matter how trials are scheduled.
inline Rng derive_rng(std::uint64_t master_seed, std::uint64_t stream_index) {
  std::uint64_t sm = master_seed ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t a = splitmix64(sm);
  sm = stream_index ^ 0xbb67ae8584caa73bULL;
  std::uint64_t b = splitmix64(sm);
  return Rng(a ^ (b * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
}

}  // namespace anonsim
