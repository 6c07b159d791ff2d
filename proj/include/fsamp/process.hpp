#pragma once

#include "fsamp/geometry.hpp"

namespace fsamp {

// alpha_t = t, sigma_t = 1 - t, g_t^2 = 2 gamma t.
struct LinearSchedule {
  double gamma = 1.0;

  double alpha(double t) const { return t; }
  double sigma(double t) const { return 1.0 - t; }
  double alpha_dot(double) const { return 1.0; }
  double sigma_dot(double) const { return -1.0; }
  double g2(double t) const { return 2.0 * gamma * t; }
};

Vec interpolate(const Vec& x0, const Vec& x1, double t);

// v_{t|0}(x | x0) = (alpha'/alpha)(x - sigma x0) + sigma' x0.
Vec conditional_velocity(const Vec& x, const Vec& x0, double t,
                         const LinearSchedule& schedule);

// Closed-form conditional drift under the linear schedule:
// x1 - x0 + gamma * score1, independent of t.
Vec euclid_drift_target(const Vec& x0, const Vec& x1, const Vec& score1,
                        double gamma);

// Conditional drift on a constant-curvature manifold, evaluated at the
// geodesic interpolant X_t:
//   Xdot_t + gamma t (J_t^{-1})^* [ P^perp_{x1} score1 - grad_{x1} log|det J_t| ].
// The ambient score is projected to T_{x1} first.
Vec riemann_drift_target(const ManifoldSpec& spec, const GeodesicFrame& frame,
                         const Vec& ambient_score1, double gamma);
Vec riemann_drift_target(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                         const Vec& ambient_score1, double t, double gamma);

}  // namespace fsamp
