#pragma once

// Seedable, splittable pseudo-random streams built on SplitMix64
// (Steele, Lea & Flood; the generator behind Java's SplittableRandom).
// A stream is keyed by a 64-bit seed plus up to three subkeys; streams with
// different keys are statistically independent, so parallel generation is
// order-free and a single CLI seed reproduces an entire run.

#include <cstdint>
#include <vector>

namespace attribnet {

constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += kSplitMixGamma;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t k1 = 0,
                        std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    // Chain one mixing round per key so that (seed, a, b) and (seed, a', b')
    // land in unrelated positions of the state space.
    state_ = seed;
    mix_in(k1);
    mix_in(k2);
    mix_in(k3);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; pairs are drawn eagerly and the spare
  // value is cached, so draw order is well defined within a stream.
  double normal();

  std::vector<double> normals(std::size_t n, double stddev = 1.0);

 private:
  void mix_in(std::uint64_t k) {
    state_ = splitmix64(state_) ^ (k * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace attribnet
