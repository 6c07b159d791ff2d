#pragma once

#include "fsamp/geometry.hpp"
#include "fsamp/random.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fsamp {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured error or statistic
  double threshold = 0.0;
  std::string detail;
};

// Random point on the manifold: uniform on spheres, wrapped normal with
// scale `spread` at the origin on hyperboloids.
Vec random_manifold_point(const ManifoldSpec& spec, Rng& rng, double spread = 1.0);
// Point at geodesic distance `dist` from x in a random direction.
Vec point_at_distance(const ManifoldSpec& spec, const Vec& x, double dist, Rng& rng);

// Central-difference Jacobian of x1 -> X_t(x0, x1) in Sigma-orthonormal
// tangent bases at x1 (columns) and X_t (rows).
Mat fd_geodesic_jacobian(const ManifoldSpec& spec, const Vec& x0, const Vec& x1, double t,
                         double h);
// Closed-form Jacobian in the same bases.
Mat closed_form_jacobian(const ManifoldSpec& spec, const Vec& x0, const Vec& x1, double t);

// Euclidean conditional drift against the velocity-plus-score decomposition
// for a Gaussian target, over n random (x0, x1, t).
CheckResult check_drift_identity(int n, std::uint64_t seed);
// Closed-form geodesic Jacobian against finite differences on S^2 and H^2.
CheckResult check_jacobian_fd(int n, std::uint64_t seed, double h = 1e-4);
// Inverse-Jacobian adjoint and log-det gradient against finite differences on S^2.
CheckResult check_inv_adjoint_fd(int n, std::uint64_t seed);
CheckResult check_logdet_fd(int n, std::uint64_t seed);
// Full Riemannian conditional drift against the finite-difference score of
// the pushed-forward density on S^2.
CheckResult check_riemann_drift_fd(int n, std::uint64_t seed);
// Jacobi ODE residual of the scaling c_t under second differences.
CheckResult check_jacobi_ode(int n, std::uint64_t seed);

CheckResult check_exp_log_roundtrip(int n, std::uint64_t seed);
CheckResult check_transport_isometry(int n, std::uint64_t seed);
CheckResult check_constraint_drift(int steps, std::uint64_t seed);

// Exact Gaussian-path drift towards N(3, 0.25) simulated with Euler-Maruyama.
struct SdeMarginalResult {
  CheckResult mean;
  CheckResult variance;
};
SdeMarginalResult check_sde_marginal(int n_paths, int nfe, std::uint64_t seed);

// Reverse-mode loss gradients against central differences on random networks.
CheckResult check_network_gradients(int n_nets, std::uint64_t seed);

// Score against central differences of the reward for every target kind.
CheckResult check_target_scores(std::uint64_t seed);

std::vector<CheckResult> run_verify_suite(std::uint64_t seed);

}  // namespace fsamp
