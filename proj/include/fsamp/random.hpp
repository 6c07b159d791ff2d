#pragma once

#include "fsamp/geometry.hpp"

#include <cstdint>
#include <random>

namespace fsamp {

using Rng = std::mt19937_64;

// Independent stream for (seed, stream index); all randomness in the library
// flows through this.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5f3759dfU};
  return Rng(seq);
}

inline Vec standard_normal(Rng& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec z(n);
  for (int i = 0; i < n; ++i) z[i] = nd(rng);
  return z;
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace fsamp
