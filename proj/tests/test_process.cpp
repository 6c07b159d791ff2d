#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsamp/error.hpp"
#include "fsamp/process.hpp"
#include "fsamp/verify.hpp"

#include <cmath>

using namespace fsamp;

namespace {

Vec s(double a) { return Vec::Constant(1, a); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }
bool near(const Vec& a, const Vec& b, double tol) { return (a - b).cwiseAbs().maxCoeff() < tol; }

}  // namespace

TEST_CASE("linear schedule") {
  const LinearSchedule sch{0.3};
  for (double t : {0.0, 0.2, 0.9, 1.0}) {
    CHECK(sch.alpha(t) + sch.sigma(t) == doctest::Approx(1.0));
    CHECK(sch.g2(t) == doctest::Approx(0.6 * t));
  }
}

TEST_CASE("interpolate") {
  CHECK(interpolate(s(0), s(1), 0.5)[0] == 0.5);
  CHECK(interpolate(s(2), s(7), 0.0)[0] == 2.0);
  CHECK(interpolate(s(2), s(7), 1.0)[0] == 7.0);
  CHECK_THROWS_AS(interpolate(s(0), v3(0, 0, 0), 0.5), Error);
}

TEST_CASE("conditional velocity") {
  Rng rng = make_rng(1);
  const LinearSchedule sch{1.0};
  for (int i = 0; i < 100; ++i) {
    const Vec x0 = standard_normal(rng, 4), x1 = standard_normal(rng, 4);
    const double t = 0.05 + 0.95 * uniform01(rng);
    CHECK(near(conditional_velocity(interpolate(x0, x1, t), x0, t, sch), x1 - x0, 1e-13));
  }
  const Vec c = v3(1, -2, 3);
  CHECK(near(conditional_velocity(c, c, 0.3, sch), Vec::Zero(3), 1e-14));
  CHECK_THROWS_AS(conditional_velocity(c, c, 0.0, sch), Error);
}

TEST_CASE("euclidean drift target") {
  CHECK(euclid_drift_target(s(0), s(2), s(-2), 0.1)[0] == doctest::Approx(1.8));
  CHECK(euclid_drift_target(s(0.5), s(2), s(-2), 0.0)[0] == 1.5);
  CHECK_THROWS_AS(euclid_drift_target(s(0), v3(0, 0, 0), s(1), 1.0), Error);
  Rng rng = make_rng(2);
  const LinearSchedule sch{0.7};
  for (int i = 0; i < 100; ++i) {
    const Vec x0 = standard_normal(rng, 3), x1 = standard_normal(rng, 3), sc = standard_normal(rng, 3);
    const double t = 0.01 + 0.99 * uniform01(rng);
    const Vec decomposed = conditional_velocity(interpolate(x0, x1, t), x0, t, sch) + 0.7 * sc;
    CHECK(near(euclid_drift_target(x0, x1, sc, 0.7), decomposed, 1e-12));
  }
}

TEST_CASE("gaussian conditional path identity") {
  const CheckResult r = check_drift_identity(1000, 3);
  INFO(r.value);
  CHECK(r.passed);
}

TEST_CASE("riemannian drift target special cases") {
  const ManifoldSpec sp = ManifoldSpec::sphere(2);
  Rng rng = make_rng(4);
  const Vec x1 = v3(1, 0, 0);
  const Vec x0 = point_at_distance(sp, x1, 1.1, rng);
  const Vec score = v3(0.3, -1.2, 0.8);
  const GeodesicFrame f1 = geodesic_frame(sp, x0, x1, 1.0);
  CHECK(near(riemann_drift_target(sp, x0, x1, score, 1.0, 0.5), f1.xdot1 + 0.5 * project_tangent(sp, x1, score), 1e-14));

  // vMF mode at x1: the score term vanishes after projection and only the
  // volume correction remains.
  const double t = 0.4, gamma = 0.8;
  const GeodesicFrame f = geodesic_frame(sp, x0, x1, t);
  const Vec expected = f.xdott - gamma * t * inv_jacobian_adjoint_apply(sp, f, logdet_gradient(sp, f));
  CHECK(near(riemann_drift_target(sp, x0, x1, 50.0 * x1, t, gamma), expected, 1e-13));

  const Vec u = riemann_drift_target(sp, x0, x1, score, t, gamma);
  CHECK(std::abs(inner(sp, u, f.xt)) < 1e-12);
  CHECK_THROWS_AS(riemann_drift_target(sp, x0, x1, score, 0.0, gamma), Error);
  CHECK_THROWS_AS(riemann_drift_target(sp, -x1, x1, score, 0.5, gamma), Error);
}

TEST_CASE("riemannian drift target against brute-force pushforward") {
  const CheckResult r = check_riemann_drift_fd(60, 5);
  INFO(r.value);
  CHECK(r.passed);
}

TEST_CASE("large-radius sphere approaches the euclidean target") {
  for (double radius : {10.0, 100.0, 1000.0}) {
    const ManifoldSpec sp = ManifoldSpec::sphere(2, 1.0 / (radius * radius));
    const Vec pole = v3(radius, 0, 0);
    const Vec a = v3(0, 0.4, -0.3), b = v3(0, -0.5, 0.6), sc = v3(0, 0.7, 0.2);
    // Charts near the pole: tangent offsets mapped by the exponential map.
    const Vec x0 = exp_map(sp, pole, a), x1 = exp_map(sp, pole, b);
    const double t = 0.6, gamma = 0.5;
    const Vec u = riemann_drift_target(sp, x0, x1, sc, t, gamma);
    const Vec ue = euclid_drift_target(a, b, sc, gamma);
    // Compare in the pole's tangent plane; curvature corrections are O(1/R^2).
    const Vec back = parallel_transport(sp, geodesic_interpolant(sp, x0, x1, t), pole, u);
    CHECK((back - ue).norm() < ue.norm() / (radius * radius));
  }
}
