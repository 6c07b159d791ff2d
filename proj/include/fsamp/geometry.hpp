#pragma once

#include <Eigen/Dense>

#include <string>

namespace fsamp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ManifoldKind { kEuclidean, kSphere, kHyperboloid };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& name);

// A constant-curvature manifold {x : <x,x>_Sigma = 1/kappa} embedded in an
// ambient space with diagonal metric Sigma. The Euclidean kind is the flat
// degenerate case; curved-geometry operations reject it.
//
// Hyperboloid points use the time-like coordinate first and live on the sheet
// with positive first coordinate.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::kEuclidean;
  int dim = 0;      // intrinsic dimension
  Vec sigma_diag;   // ambient metric diagonal
  double kappa = 0.0;

  static ManifoldSpec euclidean(int dim);
  static ManifoldSpec sphere(int dim, double kappa = 1.0);
  static ManifoldSpec hyperboloid(int dim, double kappa = -1.0);

  int ambient_dim() const { return static_cast<int>(sigma_diag.size()); }
  bool curved() const { return kind != ManifoldKind::kEuclidean; }
};

double inner(const ManifoldSpec& spec, const Vec& u, const Vec& v);
double norm(const ManifoldSpec& spec, const Vec& v);

// Max |kappa <x,x>_Sigma - 1|; zero on the manifold.
double constraint_violation(const ManifoldSpec& spec, const Vec& x);

// P_x^perp w = w - (<x,w>/<x,x>) x.
Vec project_tangent(const ManifoldSpec& spec, const Vec& x, const Vec& w);

// P_d w = (<d,w>/<d,d>) d, the rank-one projection onto span{d}.
Vec project_onto(const ManifoldSpec& spec, const Vec& direction, const Vec& w);

// Maps x back onto the manifold: rescaling by 1/sqrt(kappa <x,x>) on the
// sphere, recomputing the time-like coordinate on the hyperboloid.
Vec renormalize(const ManifoldSpec& spec, const Vec& x);

Vec exp_map(const ManifoldSpec& spec, const Vec& x, const Vec& v);
// Closed-form exponential without the final renormalization; lets callers
// measure accumulated roundoff.
Vec exp_map_unnormalized(const ManifoldSpec& spec, const Vec& x, const Vec& v);
Vec log_map(const ManifoldSpec& spec, const Vec& x, const Vec& y);
double geodesic_distance(const ManifoldSpec& spec, const Vec& x, const Vec& y);

// X_t = exp_{x1}((1 - t) log_{x1}(x0)), so X_0 = x0 and X_1 = x1.
Vec geodesic_interpolant(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                         double t);
Vec geodesic_velocity(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                      double t);

// Transport of v in T_{from} along the minimizing geodesic to T_{to}.
// Acts on tangent vectors as the Sigma-Householder reflection about from + to.
Vec parallel_transport(const ManifoldSpec& spec, const Vec& from, const Vec& to,
                       const Vec& v);

// c_t = S(t w sqrt|k|) / S(w sqrt|k|) with S = sin (k > 0) or sinh (k < 0).
double jacobian_scaling(const ManifoldSpec& spec, double omega1, double t);

// Everything the conditional-drift computations need about one geodesic
// from x1 (t = 1) back to x0 (t = 0), evaluated at time t.
struct GeodesicFrame {
  Vec x1;
  Vec xdot1;  // -log_{x1}(x0)
  double omega = 0.0;  // ||xdot1||_Sigma, the geodesic distance
  double t = 1.0;
  Vec xt;
  Vec xdott;
};

GeodesicFrame geodesic_frame(const ManifoldSpec& spec, const Vec& x0,
                             const Vec& x1, double t);

// J_t w = t T P_{xdot1} w + c_t T P^perp_{xdot1} w, w in T_{x1}.
Vec jacobian_apply(const ManifoldSpec& spec, const GeodesicFrame& frame,
                   const Vec& w);
Vec jacobian_apply(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                   double t, const Vec& w);

// (J_t^{-1})^* w = (1/t) T P_{xdot1} w + (1/c_t) T P^perp_{xdot1} w.
Vec inv_jacobian_adjoint_apply(const ManifoldSpec& spec,
                               const GeodesicFrame& frame, const Vec& w);
Vec inv_jacobian_adjoint_apply(const ManifoldSpec& spec, const Vec& x0,
                               const Vec& x1, double t, const Vec& w);

// Gradient of log|det J_t| with respect to the endpoint x1, as a tangent
// vector at x1: (d-1) sqrt|k| (t cotS(t theta) - cotS(theta)) xdot1 / omega.
Vec logdet_gradient(const ManifoldSpec& spec, const GeodesicFrame& frame);
Vec logdet_gradient(const ManifoldSpec& spec, const Vec& x0, const Vec& x1,
                    double t);

// Sigma-orthonormal basis of T_x as columns, from Gram-Schmidt on the
// projected ambient unit vectors.
Mat tangent_basis(const ManifoldSpec& spec, const Vec& x);

// Canonical base point: e_0 / sqrt|kappa|.
Vec manifold_origin(const ManifoldSpec& spec);

}  // namespace fsamp
