#pragma once

#include <cmath>
#include <cstdint>

namespace tl1::rng {

// Generator "splitmix64/v1". Counter-based: the n-th output depends only on
// (seed, n), so streams are reproducible across platforms and runs.
//
// Derived draws are defined on top of the raw 64-bit stream as follows and
// must not change between versions:
//   uniform()      top 53 bits of next(), scaled to [0,1)
//   uniform_pos()  (top 53 bits + 1) * 2^-53, in (0,1]
//   below(b)       unbiased bounded integer via rejection sampling
//   normal()       Box-Muller, exactly two uniforms per call:
//                  sqrt(-2 ln u1) * cos(2 pi u2), u1 in (0,1], u2 in [0,1)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform_pos() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection sampling keeps it exact.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  std::uint64_t state_;
};

// SplitMix64 finalizer as a standalone hash.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Child-stream derivation: fold one 64-bit coordinate into a seed.
// A child seed is fold(fold(...fold(master, c0)..., ck)) over the stream's
// coordinates in a documented, fixed order (see harness::derive_trial_seed).
inline std::uint64_t fold(std::uint64_t seed, std::uint64_t coord) {
  return mix64(seed ^ (mix64(coord + 0x9E3779B97F4A7C15ULL) +
                       0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2)));
}

}  // namespace tl1::rng
