/**
 * @file rng.hpp
 * @brief Seeded, portable pseudo-random generation for samplers and sweeps.
 *
 * Every stochastic code path in the library draws from Xoshiro256ss seeded
 * through SplitMix64, so a (generator name, seed) pair printed in an output
 * header is enough to reproduce the stream on any platform. Sub-streams for
 * sweep cells and datasets are derived with mix_seed, never by reusing a
 * generator across cells.
 */
#ifndef CMDP_RNG_HPP
#define CMDP_RNG_HPP

#include <cstdint>
#include <cstddef>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cmdp {

/// SplitMix64 step; used to expand seeds and to mix sub-stream tags.
inline std::uint64_t splitmix64_next(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic sub-seed from a base seed and a tag (cell index, size, ...).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t x = base ^ (0x9e3779b97f4a7c15ULL + (tag << 1));
  splitmix64_next(x);
  return splitmix64_next(x);
}

/// FNV-1a over a string; lets instance names participate in seed derivation.
inline std::uint64_t hash_str(const char* s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 1099511628211ULL;
  return h;
}

/**
 * xoshiro256** generator (public-domain algorithm by Blackman and Vigna).
 * State is seeded from SplitMix64 so that any 64-bit seed, including 0,
 * yields a well-mixed state.
 */
class Xoshiro256ss {
 public:
  static constexpr const char* name = "xoshiro256**";

  explicit Xoshiro256ss(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64_next(x);
  }

  std::uint64_t next() {
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

  /// Uniform double in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /**
   * One draw from a finite distribution by inverse CDF over p[0..n-1].
   * Consumes exactly one uniform. Rows are expected to sum to 1 within
   * parser tolerance; any residual mass falls on the last positive entry.
   */
  int categorical(const double* p, int n) {
    const double u = uniform01();
    double c = 0.0;
    int last_pos = -1;
    for (int i = 0; i < n; ++i) {
      if (p[i] > 0.0) last_pos = i;
      c += p[i];
      if (u < c) return i;
    }
    if (last_pos < 0) throw std::domain_error("categorical: all-zero distribution");
    return last_pos;
  }

  int categorical(const std::vector<double>& p) {
    return categorical(p.data(), static_cast<int>(p.size()));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace cmdp

#endif  // CMDP_RNG_HPP
