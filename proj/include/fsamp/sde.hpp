#pragma once

#include "fsamp/geometry.hpp"
#include "fsamp/targets.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace fsamp {

// Uniform grid t_k = t_start + k h, h = (1 - t_start) / nfe; the noise at
// step k is sqrt(2 gamma t_k h) Z_k.
struct SolverConfig {
  int nfe = 128;
  double gamma = 1.0;
  double t_start = 0.0;
  std::uint64_t seed = 0;

  double step() const;
  void validate() const;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
};

struct SolverStats {
  // Largest |kappa <x,x> - 1| seen before renormalizing (manifold runs).
  double max_constraint_violation = 0.0;
};

using DriftFn = std::function<Vec(const Vec& x, double t)>;

// Euler-Maruyama in R^d. Trajectory `stream` owns RNG stream (seed, stream).
// Throws Error(kDivergence) naming the step on a non-finite state.
Vec em_euclid(const DriftFn& drift, const Vec& x0, const SolverConfig& cfg,
              std::uint64_t stream = 0, Trajectory* path = nullptr);

// Riemannian Euler-Maruyama: X <- exp_X(h u + sqrt(2 gamma t h) P^perp Z).
Vec em_manifold(const ManifoldSpec& spec, const DriftFn& drift, const Vec& x0,
                const SolverConfig& cfg, std::uint64_t stream = 0,
                Trajectory* path = nullptr, SolverStats* stats = nullptr);

// Where states live during batched integration.
struct StateSpace {
  std::optional<ManifoldSpec> manifold;
  std::optional<ParticleLayout> com;  // zero centre of mass increments
};

using BatchDriftFn = std::function<Mat(const Mat& x, double t)>;

struct BatchResult {
  Mat x1;                  // one column per trajectory
  std::vector<char> ok;    // 0 where the trajectory diverged
  int diverged = 0;
  SolverStats stats;
};

// Integrates the columns of x0 together; column j uses stream first_stream + j
// and reproduces em_euclid / em_manifold on that stream. Divergent columns
// are frozen and flagged instead of aborting the batch.
BatchResult em_batch(const BatchDriftFn& drift, const Mat& x0, const StateSpace& space,
                     const SolverConfig& cfg, std::uint64_t first_stream = 0);

// CSV with header t,x0..x{d-1}, one row per step.
void write_trajectory_csv(std::ostream& out, const Trajectory& path);

}  // namespace fsamp
