#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsamp/error.hpp"
#include "fsamp/process.hpp"
#include "fsamp/random.hpp"
#include "fsamp/sde.hpp"
#include "fsamp/verify.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace fsamp;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

SolverConfig solver(int nfe, double gamma, std::uint64_t seed = 0) {
  SolverConfig c;
  c.nfe = nfe;
  c.gamma = gamma;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(solver(0, 1.0).validate(), Error);
  CHECK_THROWS_AS(solver(4, -1.0).validate(), Error);
  SolverConfig c = solver(4, 1.0);
  c.t_start = 0.5;
  CHECK(c.step() == 0.125);
  c.t_start = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("euclidean solver deterministic cases") {
  const Vec x0 = vec({0.5, -1.0});
  int calls = 0;
  const DriftFn zero = [&](const Vec& x, double) { ++calls; return Vec(Vec::Zero(x.size())); };
  CHECK(em_euclid(zero, x0, solver(17, 0.0)) == x0);
  CHECK(calls == 17);

  const Vec c = vec({2.0, 0.25});
  const DriftFn constant = [&](const Vec&, double) { return c; };
  CHECK((em_euclid(constant, x0, solver(10, 0.0)) - (x0 + c)).norm() < 1e-14);

  Trajectory path;
  em_euclid(constant, x0, solver(4, 0.0), 0, &path);
  REQUIRE(path.t.size() == 5);
  CHECK(path.t.front() == 0.0);
  CHECK(path.t.back() == doctest::Approx(1.0));
  std::ostringstream csv;
  write_trajectory_csv(csv, path);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t,x0,x1");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("noise scale follows left-endpoint time") {
  // One step from t = 0 injects no noise; two steps inject sqrt(2 gamma 0.5 0.5) Z.
  const DriftFn zero = [](const Vec& x, double) { return Vec(Vec::Zero(x.size())); };
  const Vec x0 = vec({1.0});
  CHECK(em_euclid(zero, x0, solver(1, 3.0, 9)) == x0);
  Rng rng = make_rng(9, 0);
  const Vec z0 = standard_normal(rng, 1);
  const Vec z1 = standard_normal(rng, 1);
  (void)z0;
  const Vec got = em_euclid(zero, x0, solver(2, 3.0, 9));
  CHECK(got[0] == doctest::Approx(1.0 + std::sqrt(2 * 3.0 * 0.5 * 0.5) * z1[0]));
}

TEST_CASE("explicit Euler convergence") {
  // Along the interpolant flow the velocity field is exact for Euler.
  const Vec a = vec({-0.3, 0.8});
  const Vec b = vec({2.0, -1.0});
  const LinearSchedule sched;
  const DriftFn flow = [&](const Vec& x, double t) { return conditional_velocity(x, a, t, sched); };
  SolverConfig c = solver(16, 0.0);
  c.t_start = 0.1;
  const Vec start = interpolate(a, b, 0.1);
  CHECK((em_euclid(flow, start, c) - b).norm() < 1e-12);

  // A curved flow dx/dt = x t has endpoint x0 exp((1 - t0^2)/2); error halves with h.
  const DriftFn curved = [](const Vec& x, double t) { return Vec(x * t); };
  const Vec x0 = vec({1.0, -0.5});
  const Vec exact = x0 * std::exp(0.5);
  double prev = 0.0;
  for (int nfe : {32, 64, 128, 256}) {
    const double err = (em_euclid(curved, x0, solver(nfe, 0.0)) - exact).norm();
    if (prev > 0.0) {
      CAPTURE(nfe);
      CHECK(prev / err == doctest::Approx(2.0).epsilon(0.2));
    }
    prev = err;
  }
}

TEST_CASE("divergence aborts with the step index") {
  const DriftFn blowup = [](const Vec& x, double t) {
    return t > 0.5 ? Vec(Vec::Constant(x.size(), std::numeric_limits<double>::infinity()))
                   : Vec(Vec::Zero(x.size()));
  };
  try {
    em_euclid(blowup, vec({0.0}), solver(8, 0.0));
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDivergence);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("seed determinism and stream independence") {
  const DriftFn drift = [](const Vec& x, double t) { return Vec(-x * t); };
  const Vec x0 = vec({0.3, 0.1, -0.2});
  CHECK(em_euclid(drift, x0, solver(50, 1.0, 4), 2) == em_euclid(drift, x0, solver(50, 1.0, 4), 2));
  CHECK(em_euclid(drift, x0, solver(50, 1.0, 4), 2) != em_euclid(drift, x0, solver(50, 1.0, 4), 3));
  CHECK(em_euclid(drift, x0, solver(50, 1.0, 4), 2) != em_euclid(drift, x0, solver(50, 1.0, 5), 2));
}

TEST_CASE("batched integration matches per-trajectory solvers") {
  const int n = 7;
  SUBCASE("euclidean") {
    Mat x0 = Mat::Random(3, n);
    const BatchDriftFn bd = [](const Mat& x, double t) { return Mat(-x * t); };
    const DriftFn d = [](const Vec& x, double t) { return Vec(-x * t); };
    const BatchResult r = em_batch(bd, x0, StateSpace{}, solver(20, 0.7, 11), 5);
    CHECK(r.diverged == 0);
    for (int j = 0; j < n; ++j)
      CHECK((r.x1.col(j) - em_euclid(d, x0.col(j), solver(20, 0.7, 11), 5 + j)).norm() < 1e-12);
  }
  SUBCASE("sphere") {
    const ManifoldSpec sp = ManifoldSpec::sphere(2);
    Rng rng = make_rng(12);
    Mat x0(3, n);
    for (int j = 0; j < n; ++j) x0.col(j) = random_manifold_point(sp, rng);
    const Vec pole = vec({0, 0, 1});
    const DriftFn d = [&](const Vec& x, double) { return project_tangent(sp, x, pole); };
    const BatchDriftFn bd = [&](const Mat& x, double t) {
      Mat out(x.rows(), x.cols());
      for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = d(x.col(j), t);
      return out;
    };
    StateSpace space;
    space.manifold = sp;
    const BatchResult r = em_batch(bd, x0, space, solver(30, 0.4, 13));
    for (int j = 0; j < n; ++j) {
      CHECK((r.x1.col(j) - em_manifold(sp, d, x0.col(j), solver(30, 0.4, 13), j)).norm() < 1e-12);
      CHECK(std::abs(r.x1.col(j).norm() - 1.0) < 1e-12);
    }
  }
  SUBCASE("divergent columns are flagged") {
    const BatchDriftFn bd = [](const Mat& x, double) {
      Mat out = Mat::Zero(x.rows(), x.cols());
      out(0, 1) = std::numeric_limits<double>::quiet_NaN();
      return out;
    };
    const BatchResult r = em_batch(bd, Mat::Zero(2, 3), StateSpace{}, solver(4, 0.0));
    CHECK(r.diverged == 1);
    CHECK(r.ok == std::vector<char>{1, 0, 1});
  }
}

TEST_CASE("manifold solver") {
  const ManifoldSpec sp = ManifoldSpec::sphere(2);
  const Vec e0 = vec({1, 0, 0});
  const DriftFn zero = [](const Vec& x, double) { return Vec(Vec::Zero(x.size())); };
  CHECK(em_manifold(sp, zero, e0, solver(9, 0.0)) == e0);

  const DriftFn quarter = [](const Vec&, double) { return vec({0, M_PI / 2, 0}); };
  CHECK((em_manifold(sp, quarter, e0, solver(1, 0.0)) - vec({0, 1, 0})).norm() < 1e-12);

  SUBCASE("noise spreads symmetrically about the start") {
    const Vec pole = vec({0, 0, 1});
    const int n = 4000;
    Vec sum = Vec::Zero(3);
    Vec sumsq = Vec::Zero(3);
    for (int j = 0; j < n; ++j) {
      const Vec x = em_manifold(sp, zero, pole, solver(32, 0.3, 21), j);
      sum += x;
      sumsq += x.cwiseProduct(x);
    }
    const Vec mean = sum / n;
    const Vec se = ((sumsq / n - mean.cwiseProduct(mean)) / n).cwiseSqrt();
    CHECK(mean[2] > 0.5);
    CHECK(std::abs(mean[0]) < 3 * se[0]);
    CHECK(std::abs(mean[1]) < 3 * se[1]);
  }

  SUBCASE("hyperboloid iterates stay on the sheet") {
    const ManifoldSpec hp = ManifoldSpec::hyperboloid(2);
    SolverStats stats;
    const Vec x = em_manifold(hp, zero, manifold_origin(hp), solver(200, 0.5, 3), 0, nullptr, &stats);
    CHECK(constraint_violation(hp, x) < 1e-12);
    CHECK(x[0] >= 1.0);
    CHECK(stats.max_constraint_violation < 1e-9);
  }

  CHECK(check_constraint_drift(10000, 31).passed);
}

TEST_CASE("gaussian path marginal") {
  const SdeMarginalResult r = check_sde_marginal(20000, 512, 41);
  CHECK_MESSAGE(r.mean.passed, r.mean.detail);
  CHECK_MESSAGE(r.variance.passed, r.variance.detail);
}
