#pragma once

#include <cstdint>

#include "gfront/geometry.hpp"

namespace gfront {

/// splitmix64 finalizer. Counter-based randomness: every random quantity in
/// the lab is a pure function of explicitly hashed integers, so fields are
/// lazily evaluable and reproducible across platforms and thread counts.
inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) { return mix64(h ^ v); }

/// Uniform double in [0,1) from 53 high bits.
inline double to_unit(uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Uniform double in [-1,1).
inline double to_symmetric(uint64_t h) { return 2.0 * to_unit(h) - 1.0; }

/// Hash of a lattice site plus a component/channel index under a seed.
inline uint64_t site_hash(uint64_t seed, const IVec& site, uint64_t comp) {
  uint64_t h = mix64(seed ^ 0x8F1BBCDC5A9E2B17ull);
  for (int i = 0; i < 3; ++i)
    h = hash_combine(h, static_cast<uint64_t>(static_cast<int64_t>(site[i])));
  return hash_combine(h, comp);
}

/// Small counter-based stream for Monte Carlo orchestration in tests and
/// experiments: draw k-th variate of a named stream deterministically.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0xD1B54A32D192ED03ull)) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }
  double uniform() { return to_unit(next_u64()); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double symmetric() { return to_symmetric(next_u64()); }
  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

  /// Uniform direction on the unit sphere in dimension dim (2 or 3).
  Vec direction(int dim) {
    if (dim == 2) {
      double a = uniform() * 6.283185307179586476925286766559;
      return Vec{std::cos(a), std::sin(a)};
    }
    // Marsaglia rejection in the cube.
    for (;;) {
      Vec v{symmetric(), symmetric(), symmetric()};
      double n2 = norm2(v);
      if (n2 > 1e-12 && n2 <= 1.0) return (1.0 / std::sqrt(n2)) * v;
    }
  }

  /// Uniform point in the ball of given radius.
  Vec in_ball(int dim, double radius) {
    for (;;) {
      Vec v{symmetric(), symmetric(), dim == 3 ? symmetric() : 0.0};
      if (norm2(v) <= 1.0) return radius * v;
    }
  }

 private:
  uint64_t state_;
};

}  // namespace gfront
