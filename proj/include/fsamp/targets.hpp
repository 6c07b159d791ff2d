#pragma once

#include "fsamp/geometry.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace fsamp {

// Isotropic Gaussian mixture; one center per row.
struct GmmParams {
  Mat centers;
  Vec weights;
  double variance = 1.0;
};

// Pairwise double-well energy over n particles in `spatial` dimensions:
// E = (1/tau) sum_{i<j} a (d - d0) + b (d - d0)^2 + c (d - d0)^4.
struct Dw4Params {
  int n_particles = 4;
  int spatial = 2;
  double a = 0.0;
  double b = -4.0;
  double c = 0.9;
  double d0 = 4.0;
  double tau = 1.0;
};

// E = (eps/tau) sum_{i<j} ((rm/d)^6 - (rm/d)^12) + osc_c * 1/2 sum_i |x_i - com|^2.
// `standard_sign` flips the pair term to (rm/d)^12 - (rm/d)^6.
struct LjParams {
  int n_particles = 13;
  int spatial = 3;
  double rm = 1.0;
  double tau = 1.0;
  double eps = 1.0;
  double osc_c = 1.0;
  bool standard_sign = false;
};

// Mixture of von Mises-Fisher components; one unit mean direction per row.
struct VmfMixtureParams {
  Mat mus;
  Vec kappas;
  Vec weights;
};

enum class TargetKind { kGmm, kDw4, kLennardJones, kVmfMixture };

std::string to_string(TargetKind kind);

// Layout of a flattened particle system: n particles of `spatial` coordinates,
// stored particle-major.
struct ParticleLayout {
  int n_particles = 0;
  int spatial = 0;
};

// An unnormalized density q(x) ~ exp(r(x)). reward() is r, score() is the
// ambient gradient of r. Copies share one score-call counter.
class TargetDensity {
 public:
  static TargetDensity gmm(GmmParams params);
  static TargetDensity dw4(Dw4Params params);
  static TargetDensity lennard_jones(LjParams params);
  static TargetDensity vmf_mixture(VmfMixtureParams params);

  TargetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::optional<ManifoldSpec>& manifold() const { return manifold_; }
  std::optional<ParticleLayout> particles() const;

  double reward(const Vec& x) const;
  double energy(const Vec& x) const { return -reward(x); }
  Vec score(const Vec& x) const;
  // Same as score() but not counted; reserved for evaluation oracles.
  Vec score_uncounted(const Vec& x) const;

  std::int64_t score_calls() const { return calls_->load(); }
  void reset_score_calls() const { calls_->store(0); }

  const GmmParams& gmm_params() const { return std::get<GmmParams>(params_); }
  const Dw4Params& dw4_params() const { return std::get<Dw4Params>(params_); }
  const LjParams& lj_params() const { return std::get<LjParams>(params_); }
  const VmfMixtureParams& vmf_params() const {
    return std::get<VmfMixtureParams>(params_);
  }

 private:
  TargetDensity() = default;

  TargetKind kind_ = TargetKind::kGmm;
  int dim_ = 0;
  std::optional<ManifoldSpec> manifold_;
  std::variant<GmmParams, Dw4Params, LjParams, VmfMixtureParams> params_;
  std::shared_ptr<std::atomic<std::int64_t>> calls_ =
      std::make_shared<std::atomic<std::int64_t>>(0);
};

// Rescales g to l2 norm `threshold` when it exceeds it.
Vec clip_score(const Vec& g, double threshold);

// Subtracts the per-dimension mean across particles.
Vec zero_com_project(const Vec& positions, const ParticleLayout& layout);

}  // namespace fsamp
