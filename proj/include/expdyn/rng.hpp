#pragma once

#include <cstdint>

// Deterministic PRNG used by every sampling routine so that runs are
// reproducible bit-for-bit across platforms and thread counts.
//
// Generators (by their constants):
//   splitmix64: state += 0x9E3779B97F4A7C15; z = state;
//               z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//               z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//               return z ^ (z >> 31);
//   xoshiro256++: 4x64 state seeded by four splitmix64 draws;
//               output rotl(s0 + s3, 23) + s0; rotl constants 17/45.
//
// Per-sample substreams are derived as seed ^ splitmix64(index + 1), so a
// sample's stream depends only on (seed, index), never on chunking.

namespace expdyn {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class xoshiro256pp {
public:
  explicit xoshiro256pp(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed);
  }

  std::uint64_t next() {
    const std::uint64_t out = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return out;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Stream for the index-th sample of a seeded batch.
inline xoshiro256pp substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t ix = index + 1;
  return xoshiro256pp(seed ^ splitmix64(ix));
}

}  // namespace expdyn
