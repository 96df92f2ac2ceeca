#pragma once

#include <cstdint>

namespace glmd {

// splitmix64: the 64-bit finalizer applied to a Weyl sequence. Used both as
// the base uniform generator and as the seed-derivation mixer, so every
// stream is a pure function of (seed, position).
inline std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derive an independent child seed from (seed, salt). Chained calls give the
// (trial, shard) derivation rule used by the simulation harness.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64_finalize(seed ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_finalize(state_);
  }

  // 53-bit uniform, strictly inside (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse-CDF transform (Wichura's PPND16,
  // absolute error well below 1e-9).
  double next_normal();

 private:
  std::uint64_t state_;
};

// Inverse of the standard normal CDF, accurate to ~1e-16 relative for
// p in (0, 1). Exposed for tests and the data-generation routines.
double inverse_normal_cdf(double p);

}  // namespace glmd
