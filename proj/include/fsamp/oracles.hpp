#pragma once

#include "fsamp/random.hpp"
#include "fsamp/targets.hpp"

#include <cstdint>

namespace fsamp {

// Reference samplers used only for evaluation and testing. Samples are rows.

struct LangevinConfig {
  int n_samples = 1000;
  int n_steps = 10000;  // first half is burn-in
  double step_size = 1e-3;
  int thin = 0;         // 0: one sample per chain, taken at the last step
  double init_std = 1.0;
  std::uint64_t seed = 0;
};

struct LangevinResult {
  Mat samples;
  int diverged_chains = 0;
};

// Unadjusted Langevin: x <- x + eps grad r(x) + sqrt(2 eps) z.
// Chains whose state becomes non-finite are dropped and counted.
LangevinResult langevin_reference(const TargetDensity& target,
                                  const LangevinConfig& cfg);

// Wood's rejection sampler for vMF(mu, kappa) on the unit sphere.
Mat vmf_sample_oracle(const Vec& mu, double kappa, int n, std::uint64_t seed);

// Exact i.i.d. draws from a GMM or vMF-mixture target.
Mat exact_mixture_samples(const TargetDensity& target, int n, std::uint64_t seed);

Vec uniform_sphere_point(Rng& rng, int ambient_dim);

}  // namespace fsamp
