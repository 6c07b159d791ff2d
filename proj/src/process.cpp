#include "fsamp/process.hpp"

#include "fsamp/error.hpp"

namespace fsamp {

namespace {

void require_same_size(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": shape mismatch (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

Vec interpolate(const Vec& x0, const Vec& x1, double t) {
  require_same_size(x0, x1, "interpolate");
  return (1.0 - t) * x0 + t * x1;
}

Vec conditional_velocity(const Vec& x, const Vec& x0, double t,
                         const LinearSchedule& schedule) {
  require_same_size(x, x0, "conditional_velocity");
  const double a = schedule.alpha(t);
  if (a == 0.0) {
    throw Error(ErrorCode::kSingular, "conditional_velocity: alpha_t = 0");
  }
  return (schedule.alpha_dot(t) / a) * (x - schedule.sigma(t) * x0) +
         schedule.sigma_dot(t) * x0;
}

Vec euclid_drift_target(const Vec& x0, const Vec& x1, const Vec& score1,
                        double gamma) {
  require_same_size(x0, x1, "euclid_drift_target");
  require_same_size(x1, score1, "euclid_drift_target");
  return x1 - x0 + gamma * score1;
}

Vec riemann_drift_target(const ManifoldSpec& spec, const GeodesicFrame& frame,
                         const Vec& ambient_score1, double gamma) {
  const Vec score = project_tangent(spec, frame.x1, ambient_score1);
  const Vec bracket = score - logdet_gradient(spec, frame);
  return frame.xdott +
         gamma * frame.t * inv_jacobian_adjoint_apply(spec, frame, bracket);
}

Vec riemann_drift_target(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                         const Vec& ambient_score1, double t, double gamma) {
  if (!(t > 0.0)) {
    throw Error(ErrorCode::kSingular, "riemann_drift_target: t must be > 0");
  }
  return riemann_drift_target(spec, geodesic_frame(spec, x0, x1, t),
                              ambient_score1, gamma);
}

}  // namespace fsamp
