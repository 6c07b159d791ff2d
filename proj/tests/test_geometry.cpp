#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsamp/error.hpp"
#include "fsamp/geometry.hpp"
#include "fsamp/verify.hpp"

#include <cmath>

using namespace fsamp;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

const ManifoldSpec kS2 = ManifoldSpec::sphere(2);
const ManifoldSpec kH2 = ManifoldSpec::hyperboloid(2);

bool near(const Vec& a, const Vec& b, double tol) { return (a - b).cwiseAbs().maxCoeff() < tol; }

}  // namespace

TEST_CASE("inner products") {
  CHECK(inner(ManifoldSpec::euclidean(2), v2(1, 2), v2(3, 4)) == 11.0);
  ManifoldSpec lorentz = ManifoldSpec::hyperboloid(1);
  CHECK(inner(lorentz, v2(1, 0), v2(1, 0)) == -1.0);
  CHECK(inner(ManifoldSpec::euclidean(2), v2(1, 0), v2(0, 1)) == 0.0);
  CHECK_THROWS_AS(inner(kS2, v2(1, 0), v3(1, 0, 0)), Error);
}

TEST_CASE("ManifoldSpec invariants") {
  CHECK(kS2.ambient_dim() == 3);
  CHECK(kS2.kappa > 0);
  CHECK(kH2.sigma_diag[0] == -1.0);
  CHECK(kH2.sigma_diag[1] == 1.0);
  CHECK(kH2.kappa < 0);
  CHECK_THROWS_AS(ManifoldSpec::sphere(2, -1.0), Error);
  CHECK_THROWS_AS(ManifoldSpec::hyperboloid(2, 1.0), Error);
  CHECK_THROWS_AS(exp_map(ManifoldSpec::euclidean(2), v2(0, 0), v2(1, 0)), Error);
}

TEST_CASE("tangent projection") {
  CHECK(near(project_tangent(kS2, v3(1, 0, 0), v3(2, 3, 4)), v3(0, 3, 4), 1e-15));
  CHECK(near(project_tangent(kS2, v3(1, 0, 0), v3(5, 0, 0)), v3(0, 0, 0), 1e-15));
  CHECK(near(project_tangent(kS2, v3(1, 0, 0), v3(0, 3, 4)), v3(0, 3, 4), 1e-15));
  Rng rng = make_rng(1);
  for (int i = 0; i < 100; ++i) {
    const ManifoldSpec& m = i % 2 ? kH2 : kS2;
    const Vec x = random_manifold_point(m, rng);
    const Vec w = standard_normal(rng, 3);
    const Vec p = project_tangent(m, x, w);
    CHECK(std::abs(inner(m, p, x)) < 1e-9 * std::max(1.0, p.norm() * x.norm()));
    CHECK(near(project_tangent(m, x, p), p, 1e-12 * std::max(1.0, p.norm())));
  }
}

TEST_CASE("exponential map") {
  CHECK(near(exp_map(kS2, v3(1, 0, 0), v3(0, M_PI / 2, 0)), v3(0, 1, 0), 1e-15));
  CHECK(near(exp_map(kS2, v3(1, 0, 0), v3(0, 0, 0)), v3(1, 0, 0), 0.0 + 1e-300));
  const double s = 0.7;
  CHECK(near(exp_map(kH2, v3(1, 0, 0), v3(0, s, 0)), v3(std::cosh(s), std::sinh(s), 0), 1e-14));
  CHECK_THROWS_AS(exp_map(kS2, v3(1, 0, 0), v3(1, 1, 0)), Error);
  Rng rng = make_rng(2);
  for (int i = 0; i < 100; ++i) {
    const ManifoldSpec& m = i % 2 ? kH2 : kS2;
    const Vec x = random_manifold_point(m, rng);
    const Vec y = exp_map(m, x, project_tangent(m, x, standard_normal(rng, 3)));
    // Rounding in <y,y> grows with the coordinates on the hyperboloid.
    CHECK(constraint_violation(m, y) < 1e-14 * (1.0 + y.squaredNorm()));
    if (m.kind == ManifoldKind::kHyperboloid) CHECK(y[0] > 0);
  }
}

TEST_CASE("logarithm map and distance") {
  CHECK(near(log_map(kS2, v3(1, 0, 0), v3(0, 1, 0)), v3(0, M_PI / 2, 0), 1e-15));
  CHECK(near(log_map(kS2, v3(1, 0, 0), v3(1, 0, 0)), v3(0, 0, 0), 1e-15));
  CHECK_THROWS_AS(log_map(kS2, v3(1, 0, 0), v3(-1, 0, 0)), Error);
  try {
    log_map(kS2, v3(1, 0, 0), v3(-1, 0, 0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCutLocus);
  }
  CHECK(geodesic_distance(kS2, v3(1, 0, 0), v3(0, 1, 0)) == doctest::Approx(M_PI / 2).epsilon(1e-15));
  CHECK(geodesic_distance(kS2, v3(1, 0, 0), v3(1, 0, 0)) == 0.0);
  CHECK(geodesic_distance(kS2, v3(1, 0, 0), v3(-1, 0, 0)) == doctest::Approx(M_PI));
  Rng rng = make_rng(3);
  for (int i = 0; i < 200; ++i) {
    const ManifoldSpec& m = i % 2 ? kH2 : kS2;
    const Vec x = random_manifold_point(m, rng);
    const Vec y = point_at_distance(m, x, 0.01 + 2.5 * uniform01(rng), rng);
    const Vec v = log_map(m, x, y);
    CHECK(norm(m, v) == doctest::Approx(geodesic_distance(m, x, y)).epsilon(1e-10));
    CHECK(near(exp_map(m, x, v), y, 1e-8 * std::max(1.0, y.norm())));
  }
}

TEST_CASE("exp/log round trip over 1000 draws") {
  const CheckResult r = check_exp_log_roundtrip(1000, 11);
  INFO(r.value);
  CHECK(r.passed);
}

TEST_CASE("geodesic interpolant and velocity") {
  const Vec x1 = v3(1, 0, 0), x0 = v3(0, 1, 0);
  CHECK(near(geodesic_interpolant(kS2, x0, x1, 0.5), v3(std::sqrt(0.5), std::sqrt(0.5), 0), 1e-15));
  CHECK(near(geodesic_interpolant(kS2, x0, x1, 1.0), x1, 1e-15));
  CHECK(near(geodesic_interpolant(kS2, x0, x1, 0.0), x0, 1e-15));
  CHECK(near(geodesic_velocity(kS2, x0, x1, 1.0), v3(0, -M_PI / 2, 0), 1e-15));
  CHECK(near(geodesic_velocity(kS2, x0, x1, 1.0), -log_map(kS2, x1, x0), 1e-15));

  Rng rng = make_rng(4);
  for (int i = 0; i < 100; ++i) {
    const ManifoldSpec& m = i % 2 ? kH2 : kS2;
    const Vec b = random_manifold_point(m, rng, 0.5);
    const Vec a = point_at_distance(m, b, 0.1 + 2.0 * uniform01(rng), rng);
    const double omega = geodesic_distance(m, a, b);
    for (double t : {0.25, 0.5, 0.75}) {
      const Vec v = geodesic_velocity(m, a, b, t);
      CHECK(std::abs(norm(m, v) - omega) < 1e-10);
      const double h = 1e-4;
      const Vec fd = (geodesic_interpolant(m, a, b, t + h) - geodesic_interpolant(m, a, b, t - h)) / (2 * h);
      CHECK(near(fd, v, 1e-6 * std::max(1.0, v.norm())));
      CHECK(std::abs(inner(m, v, geodesic_interpolant(m, a, b, t))) < 1e-9 * std::max(1.0, v.norm()));
    }
  }
}

TEST_CASE("parallel transport") {
  CHECK(near(parallel_transport(kS2, v3(1, 0, 0), v3(0, 1, 0), v3(0, 1, 0)), v3(-1, 0, 0), 1e-15));
  CHECK(near(parallel_transport(kS2, v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1)), v3(0, 0, 1), 1e-15));
  CHECK_THROWS_AS(parallel_transport(kS2, v3(1, 0, 0), v3(-1, 0, 0), v3(0, 1, 0)), Error);
  const CheckResult r = check_transport_isometry(1000, 12);
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("jacobian scaling") {
  CHECK(jacobian_scaling(kS2, M_PI / 2, 0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(jacobian_scaling(kS2, 1.3, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jacobian_scaling(kH2, 1.0, 0.5) == doctest::Approx(std::sinh(0.5) / std::sinh(1.0)).epsilon(1e-14));
  CHECK(jacobian_scaling(kH2, 1.0, 0.5) == doctest::Approx(0.44341).epsilon(1e-5));
  CHECK(jacobian_scaling(kS2, 1e-9, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(jacobian_scaling(kH2, 1e-9, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(jacobian_scaling(kS2, M_PI, 0.5), Error);
  CHECK(check_jacobi_ode(200, 13).passed);
}

TEST_CASE("geodesic jacobian against finite differences") {
  const CheckResult r = check_jacobian_fd(200, 14);
  INFO(r.value);
  CHECK(r.passed);
}

TEST_CASE("inverse jacobian adjoint") {
  const Vec x1 = v3(1, 0, 0), x0 = v3(0, 1, 0);
  Rng rng = make_rng(5);
  const Vec w = project_tangent(kS2, x1, standard_normal(rng, 3));
  CHECK(near(inv_jacobian_adjoint_apply(kS2, x0, x1, 1.0, w), w, 1e-14));
  const GeodesicFrame f = geodesic_frame(kS2, x0, x1, 0.5);
  const Vec along = 0.7 * f.xdot1;
  CHECK(near(inv_jacobian_adjoint_apply(kS2, f, along), 2.0 * parallel_transport(kS2, x1, f.xt, along), 1e-14));
  CHECK_THROWS_AS(inv_jacobian_adjoint_apply(kS2, x0, x1, 0.0, w), Error);
  // Adjoint pairing: <(J^-1)* w, J v> = <w, v>.
  for (int i = 0; i < 50; ++i) {
    const Vec b = random_manifold_point(kS2, rng);
    const Vec a = point_at_distance(kS2, b, 0.1 + 2.4 * uniform01(rng), rng);
    const double t = 0.05 + 0.95 * uniform01(rng);
    const Vec p = project_tangent(kS2, b, standard_normal(rng, 3));
    const Vec q = project_tangent(kS2, b, standard_normal(rng, 3));
    const double lhs = inner(kS2, inv_jacobian_adjoint_apply(kS2, a, b, t, p), jacobian_apply(kS2, a, b, t, q));
    CHECK(lhs == doctest::Approx(inner(kS2, p, q)).epsilon(1e-10).scale(1.0));
  }
  const CheckResult r = check_inv_adjoint_fd(200, 15);
  INFO(r.value);
  CHECK(r.value < 1e-5);
}

TEST_CASE("log-det gradient") {
  const Vec x1 = v3(1, 0, 0), x0 = v3(0, 1, 0);
  const GeodesicFrame f = geodesic_frame(kS2, x0, x1, 0.5);
  CHECK(near(logdet_gradient(kS2, f), f.xdot1 / M_PI, 1e-15));
  CHECK(near(logdet_gradient(kS2, x0, x1, 1.0), Vec::Zero(3), 1e-15));
  // Series branch agrees with the closed form just above the threshold.
  Rng rng = make_rng(6);
  const Vec b = random_manifold_point(kS2, rng);
  for (double d : {5e-5, 2e-4}) {
    const Vec a = point_at_distance(kS2, b, d, rng);
    const Vec g = logdet_gradient(kS2, a, b, 0.4);
    const long double dl = geodesic_distance(kS2, a, b);
    const double coef = static_cast<double>((0.4L / std::tan(0.4L * dl) - 1.0L / std::tan(dl)) / dl);
    CHECK(near(g, coef * geodesic_frame(kS2, a, b, 0.4).xdot1, 1e-12));
  }
  const CheckResult r = check_logdet_fd(200, 16);
  INFO(r.value);
  CHECK(r.passed);
}

TEST_CASE("tangent basis is orthonormal") {
  Rng rng = make_rng(7);
  for (int i = 0; i < 20; ++i) {
    const ManifoldSpec& m = i % 2 ? kH2 : kS2;
    const Vec x = random_manifold_point(m, rng);
    const Mat b = tangent_basis(m, x);
    REQUIRE(b.cols() == 2);
    const Mat g = b.transpose() * m.sigma_diag.asDiagonal() * b;
    CHECK((g - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(inner(m, b.col(k), x)) < 1e-10);
  }
}
