#pragma once

#include <cstdint>
#include <random>

namespace nolm {

using Rng = std::mt19937_64;

// Child streams for sweeps and resamples: seed = root + index.
inline Rng derive_rng(std::uint64_t root_seed, std::uint64_t index) {
  return Rng(root_seed + index);
}

inline std::int64_t sample_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

}  // namespace nolm
