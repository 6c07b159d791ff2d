#include "fsamp/geometry.hpp"

#include "fsamp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fsamp {

namespace {

constexpr double kSeriesThreshold = 1e-6;
constexpr double kCutLocusTol = 1e-9;

void require_curved(const ManifoldSpec& spec, const char* op) {
  if (!spec.curved()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(op) + ": not defined on a Euclidean manifold");
  }
}

void require_dim(const ManifoldSpec& spec, const Vec& v, const char* op) {
  if (v.size() != spec.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": expected ambient dimension " +
                    std::to_string(spec.ambient_dim()) + ", got " +
                    std::to_string(v.size()));
  }
}

bool positive_curvature(const ManifoldSpec& spec) { return spec.kappa > 0.0; }

// S(x)/x with S = sin or sinh.
double sinc_s(bool positive, double x) {
  if (std::abs(x) < kSeriesThreshold) {
    const double x2 = x * x;
    return positive ? 1.0 - x2 / 6.0 + x2 * x2 / 120.0
                    : 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return positive ? std::sin(x) / x : std::sinh(x) / x;
}

double sin_s(bool positive, double x) {
  return positive ? std::sin(x) : std::sinh(x);
}

double cos_s(bool positive, double x) {
  return positive ? std::cos(x) : std::cosh(x);
}

void check_tangent(const ManifoldSpec& spec, const Vec& x, const Vec& v,
                   const char* op) {
  const double scale = std::max(1.0, v.norm() * x.norm());
  if (std::abs(inner(spec, x, v)) > 1e-8 * scale) {
    throw Error(ErrorCode::kNotTangent,
                std::string(op) + ": vector is not tangent at the base point");
  }
}

}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return "euclidean";
    case ManifoldKind::kSphere:
      return "sphere";
    case ManifoldKind::kHyperboloid:
      return "hyperboloid";
  }
  return "unknown";
}

ManifoldKind manifold_kind_from_string(const std::string& name) {
  if (name == "euclidean") return ManifoldKind::kEuclidean;
  if (name == "sphere") return ManifoldKind::kSphere;
  if (name == "hyperboloid") return ManifoldKind::kHyperboloid;
  throw Error(ErrorCode::kInvalidArgument, "unknown manifold kind: " + name);
}

ManifoldSpec ManifoldSpec::euclidean(int dim) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  ManifoldSpec s;
  s.kind = ManifoldKind::kEuclidean;
  s.dim = dim;
  s.sigma_diag = Vec::Ones(dim);
  s.kappa = 0.0;
  return s;
}

ManifoldSpec ManifoldSpec::sphere(int dim, double kappa) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  if (!(kappa > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sphere requires kappa > 0");
  }
  ManifoldSpec s;
  s.kind = ManifoldKind::kSphere;
  s.dim = dim;
  s.sigma_diag = Vec::Ones(dim + 1);
  s.kappa = kappa;
  return s;
}

ManifoldSpec ManifoldSpec::hyperboloid(int dim, double kappa) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  if (!(kappa < 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "hyperboloid requires kappa < 0");
  }
  ManifoldSpec s;
  s.kind = ManifoldKind::kHyperboloid;
  s.dim = dim;
  s.sigma_diag = Vec::Ones(dim + 1);
  s.sigma_diag[0] = -1.0;
  s.kappa = kappa;
  return s;
}

double inner(const ManifoldSpec& spec, const Vec& u, const Vec& v) {
  if (u.size() != spec.ambient_dim() || v.size() != spec.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "inner: vectors do not match the ambient dimension");
  }
  return (spec.sigma_diag.array() * u.array() * v.array()).sum();
}

double norm(const ManifoldSpec& spec, const Vec& v) {
  return std::sqrt(std::max(0.0, inner(spec, v, v)));
}

double constraint_violation(const ManifoldSpec& spec, const Vec& x) {
  require_curved(spec, "constraint_violation");
  return std::abs(spec.kappa * inner(spec, x, x) - 1.0);
}

Vec project_tangent(const ManifoldSpec& spec, const Vec& x, const Vec& w) {
  const double xx = inner(spec, x, x);
  if (xx == 0.0) {
    throw Error(ErrorCode::kSingular, "project_tangent: degenerate base point");
  }
  return w - (inner(spec, x, w) / xx) * x;
}

Vec project_onto(const ManifoldSpec& spec, const Vec& direction, const Vec& w) {
  const double dd = inner(spec, direction, direction);
  if (dd == 0.0) return Vec::Zero(w.size());
  return (inner(spec, direction, w) / dd) * direction;
}

Vec renormalize(const ManifoldSpec& spec, const Vec& x) {
  require_curved(spec, "renormalize");
  if (spec.kind == ManifoldKind::kHyperboloid) {
    // Scaling loses precision far from the origin; solve for the time-like
    // coordinate instead.
    if (!x.allFinite()) {
      throw Error(ErrorCode::kNotOnManifold, "renormalize: non-finite point");
    }
    Vec out = x;
    out[0] = std::sqrt(1.0 / std::abs(spec.kappa) + x.tail(x.size() - 1).squaredNorm());
    return out;
  }
  const double s = spec.kappa * inner(spec, x, x);
  if (!(s > 0.0)) {
    throw Error(ErrorCode::kNotOnManifold,
                "renormalize: point cannot be rescaled onto the manifold");
  }
  return x / std::sqrt(s);
}

Vec exp_map(const ManifoldSpec& spec, const Vec& x, const Vec& v) {
  return renormalize(spec, exp_map_unnormalized(spec, x, v));
}

Vec exp_map_unnormalized(const ManifoldSpec& spec, const Vec& x, const Vec& v) {
  require_curved(spec, "exp_map");
  require_dim(spec, x, "exp_map");
  require_dim(spec, v, "exp_map");
  check_tangent(spec, x, v, "exp_map");
  const bool pos = positive_curvature(spec);
  const double theta = std::sqrt(std::abs(spec.kappa)) * norm(spec, v);
  return cos_s(pos, theta) * x + sinc_s(pos, theta) * v;
}

Vec log_map(const ManifoldSpec& spec, const Vec& x, const Vec& y) {
  require_curved(spec, "log_map");
  require_dim(spec, x, "log_map");
  require_dim(spec, y, "log_map");
  const bool pos = positive_curvature(spec);
  const double kxy = spec.kappa * inner(spec, x, y);  // cos(theta) / cosh(theta)
  if (pos && 1.0 + kxy < kCutLocusTol) {
    throw Error(ErrorCode::kCutLocus,
                "log_map: antipodal points, the minimizing geodesic is not unique");
  }
  const Vec u = y - kxy * x;
  const double theta =
      pos ? std::acos(std::clamp(kxy, -1.0, 1.0)) : std::acosh(std::max(kxy, 1.0));
  return u / sinc_s(pos, theta);
}

double geodesic_distance(const ManifoldSpec& spec, const Vec& x, const Vec& y) {
  require_curved(spec, "geodesic_distance");
  const bool pos = positive_curvature(spec);
  const double kxy = spec.kappa * inner(spec, x, y);
  const double theta =
      pos ? std::acos(std::clamp(kxy, -1.0, 1.0)) : std::acosh(std::max(kxy, 1.0));
  return theta / std::sqrt(std::abs(spec.kappa));
}

GeodesicFrame geodesic_frame(const ManifoldSpec& spec, const Vec& x0,
                             const Vec& x1, double t) {
  const bool pos = positive_curvature(spec);
  const double sk = std::sqrt(std::abs(spec.kappa));
  GeodesicFrame f;
  f.x1 = x1;
  f.t = t;
  const Vec v = log_map(spec, x1, x0);
  f.xdot1 = -v;
  f.omega = norm(spec, v);
  const double s = 1.0 - t;
  const double theta_s = sk * s * f.omega;
  f.xt = renormalize(spec, cos_s(pos, theta_s) * x1 + sinc_s(pos, theta_s) * s * v);
  // d/ds exp_{x1}(s v) = -sgn sqrt|k| w S(theta_s) x1 + C(theta_s) v; Xdot_t = -d/ds.
  const double sgn = pos ? 1.0 : -1.0;
  f.xdott = sgn * sk * f.omega * sin_s(pos, theta_s) * x1 - cos_s(pos, theta_s) * v;
  return f;
}

Vec geodesic_interpolant(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                         double t) {
  return geodesic_frame(spec, x0, x1, t).xt;
}

Vec geodesic_velocity(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                      double t) {
  return geodesic_frame(spec, x0, x1, t).xdott;
}

Vec parallel_transport(const ManifoldSpec& spec, const Vec& from, const Vec& to,
                       const Vec& v) {
  require_curved(spec, "parallel_transport");
  require_dim(spec, v, "parallel_transport");
  const double denom = 1.0 + spec.kappa * inner(spec, from, to);
  if (denom < kCutLocusTol) {
    throw Error(ErrorCode::kCutLocus,
                "parallel_transport: antipodal endpoints");
  }
  return v - (spec.kappa * inner(spec, to, v) / denom) * (from + to);
}

double jacobian_scaling(const ManifoldSpec& spec, double omega1, double t) {
  require_curved(spec, "jacobian_scaling");
  const bool pos = positive_curvature(spec);
  const double theta = std::sqrt(std::abs(spec.kappa)) * omega1;
  if (pos && theta >= std::numbers::pi) {
    throw Error(ErrorCode::kCutLocus,
                "jacobian_scaling: omega * sqrt(kappa) must be below pi");
  }
  return t * sinc_s(pos, t * theta) / sinc_s(pos, theta);
}

Vec jacobian_apply(const ManifoldSpec& spec, const GeodesicFrame& f,
                   const Vec& w) {
  const Vec par = project_onto(spec, f.xdot1, w);
  const Vec perp = w - par;
  const double c = jacobian_scaling(spec, f.omega, f.t);
  return parallel_transport(spec, f.x1, f.xt, f.t * par + c * perp);
}

Vec jacobian_apply(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                   double t, const Vec& w) {
  return jacobian_apply(spec, geodesic_frame(spec, x0, x1, t), w);
}

Vec inv_jacobian_adjoint_apply(const ManifoldSpec& spec, const GeodesicFrame& f,
                               const Vec& w) {
  if (!(f.t > 0.0)) {
    throw Error(ErrorCode::kSingular,
                "inv_jacobian_adjoint_apply: Jacobian is singular at t = 0");
  }
  const Vec par = project_onto(spec, f.xdot1, w);
  const Vec perp = w - par;
  const double c = jacobian_scaling(spec, f.omega, f.t);
  return parallel_transport(spec, f.x1, f.xt, par / f.t + perp / c);
}

Vec inv_jacobian_adjoint_apply(const ManifoldSpec& spec, const Vec& x0,
                               const Vec& x1, double t, const Vec& w) {
  return inv_jacobian_adjoint_apply(spec, geodesic_frame(spec, x0, x1, t), w);
}

Vec logdet_gradient(const ManifoldSpec& spec, const GeodesicFrame& f) {
  require_curved(spec, "logdet_gradient");
  if (!(f.t > 0.0)) {
    throw Error(ErrorCode::kSingular, "logdet_gradient: singular at t = 0");
  }
  const bool pos = positive_curvature(spec);
  const double ak = std::abs(spec.kappa);
  const double theta = std::sqrt(ak) * f.omega;
  if (pos && theta >= std::numbers::pi) {
    throw Error(ErrorCode::kCutLocus, "logdet_gradient: cotangent singular");
  }
  const double t = f.t;
  // coefficient = sqrt|k| (t cotS(t theta) - cotS(theta)) / omega
  double coeff;
  if (theta < 1e-4) {
    const double sgn = pos ? 1.0 : -1.0;
    coeff = ak * (sgn * (1.0 - t * t) / 3.0 +
                  theta * theta * (1.0 - t * t * t * t) / 45.0);
  } else {
    const double cot_t = cos_s(pos, t * theta) / sin_s(pos, t * theta);
    const double cot_1 = cos_s(pos, theta) / sin_s(pos, theta);
    coeff = std::sqrt(ak) * (t * cot_t - cot_1) / f.omega;
  }
  return (spec.dim - 1) * coeff * f.xdot1;
}

Vec logdet_gradient(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                    double t) {
  return logdet_gradient(spec, geodesic_frame(spec, x0, x1, t));
}

Mat tangent_basis(const ManifoldSpec& spec, const Vec& x) {
  require_curved(spec, "tangent_basis");
  const int n = spec.ambient_dim();
  Mat basis(n, spec.dim);
  int found = 0;
  for (int i = 0; i < n && found < spec.dim; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    Vec w = project_tangent(spec, x, e);
    for (int j = 0; j < found; ++j) {
      w -= inner(spec, basis.col(j), w) * basis.col(j);
    }
    const double nw = norm(spec, w);
    if (nw < 1e-6) continue;
    basis.col(found++) = w / nw;
  }
  if (found != spec.dim) {
    throw Error(ErrorCode::kSingular, "tangent_basis: rank deficient");
  }
  return basis;
}

Vec manifold_origin(const ManifoldSpec& spec) {
  Vec o = Vec::Zero(spec.ambient_dim());
  if (spec.curved()) o[0] = 1.0 / std::sqrt(std::abs(spec.kappa));
  return o;
}

}  // namespace fsamp
