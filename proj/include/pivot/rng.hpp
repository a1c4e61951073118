#pragma once

#include <cstdint>

namespace pivot {

// Deterministic 64-bit mix/stream generator (SplitMix64).  Used wherever
// the library needs reproducible pseudo-random values: per-seed scenario
// jitter, texture patterns, disturbance phases.  Not for cryptography.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Stateless hash of a key sequence, for position-dependent but seed-stable
// values (e.g. per-pin friction texture).
inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  SplitMix64 g(a ^ (b * 0x9e3779b97f4a7c15ULL) ^ (c * 0xd1b54a32d192ed03ULL));
  return g.next();
}

}  // namespace pivot
