#pragma once

#include <cstdint>

namespace lesionseg {

// Deterministic 64-bit generator with SplitMix64 stepping. Every random draw
// in the pipeline goes through this type; std:: distributions are avoided on
// purpose because their sequences differ between standard libraries.
class RngState {
public:
  explicit RngState(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform real in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Fixed-point multiply; the residual bias is
  // below n / 2^64 and the mapping is the same on every platform.
  uint64_t uniform_below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(
                    uniform_below(static_cast<uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  uint64_t state() const { return state_; }

private:
  uint64_t state_;
};

// SplitMix64 finalizer, used to turn structured seeds into well-mixed states.
inline uint64_t splitmix_mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-sample stream derivation: state = mix(master ^ (epoch * 2^32 + index)).
// Injective over (epoch, index) in practical ranges, so samples can be
// augmented in any order, or in parallel, without changing their draws.
inline RngState derive_rng(uint64_t master_seed, uint64_t epoch,
                           uint64_t index) {
  return RngState(splitmix_mix(master_seed ^ (epoch * 0x100000000ULL + index)));
}

} // namespace lesionseg
