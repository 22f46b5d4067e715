#pragma once

#include <cstdint>

namespace symm {

// Versioned, platform-independent generator: xoshiro256** seeded through
// SplitMix64. Distributions are implemented here rather than through
// <random> so that a (seed, stream) pair yields identical draws with every
// standard library.
class Rng {
public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform();
  // Uniform integer in [0, bound), bound > 0. Unbiased (Lemire rejection).
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via Box-Muller; caches the second deviate.
  double normal();

  // Independent child stream, deterministic in (parent state, tag).
  Rng split(std::uint64_t tag);

private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream tags so that each operation draws from its own sequence.
namespace streams {
inline constexpr std::uint64_t kSurfaceSampling = 0x5355524641434531ULL;
inline constexpr std::uint64_t kDensify = 0x44454e5349465931ULL;
inline constexpr std::uint64_t kRandomGuess = 0x52414e444f4d4731ULL;
} // namespace streams

} // namespace symm
