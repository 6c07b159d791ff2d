#include "fsamp/verify.hpp"

#include "fsamp/error.hpp"
#include "fsamp/net.hpp"
#include "fsamp/oracles.hpp"
#include "fsamp/process.hpp"
#include "fsamp/sde.hpp"
#include "fsamp/targets.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace fsamp {

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

CheckResult make_result(std::string name, double value, double threshold, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.value = value;
  r.threshold = threshold;
  r.passed = std::isfinite(value) && value < threshold;
  r.detail = std::move(detail);
  return r;
}

// Coordinates of the ambient vector v in the Sigma-orthonormal basis b.
Vec coords(const ManifoldSpec& spec, const Mat& b, const Vec& v) {
  return b.transpose() * (spec.sigma_diag.asDiagonal() * v);
}

Vec random_tangent(const ManifoldSpec& spec, const Vec& x, Rng& rng) {
  return project_tangent(spec, x, standard_normal(rng, spec.ambient_dim()));
}

// Inverse of x1 -> X_t(x0, x1) along the geodesic from x0.
Vec pull_back(const ManifoldSpec& spec, const Vec& x0, const Vec& x, double t) {
  return exp_map(spec, x0, log_map(spec, x0, x) / t);
}

double log_abs_det_fd(const ManifoldSpec& spec, const Vec& x0, const Vec& x1, double t) {
  return std::log(std::abs(fd_geodesic_jacobian(spec, x0, x1, t, 1e-4).determinant()));
}

struct Config {
  ManifoldSpec spec;
  Vec x0;
  Vec x1;
  double t;
};

Config random_config(const ManifoldSpec& spec, Rng& rng, double max_dist, double t_lo) {
  Config c{spec, {}, {}, 0.0};
  c.x1 = random_manifold_point(spec, rng, 0.5);
  c.x0 = point_at_distance(spec, c.x1, uniform(rng, 0.05, max_dist), rng);
  c.t = uniform(rng, t_lo, 1.0);
  return c;
}

}  // namespace

Vec random_manifold_point(const ManifoldSpec& spec, Rng& rng, double spread) {
  if (spec.kind == ManifoldKind::kSphere) {
    return uniform_sphere_point(rng, spec.ambient_dim()) / std::sqrt(spec.kappa);
  }
  const Vec o = manifold_origin(spec);
  return exp_map(spec, o, spread * random_tangent(spec, o, rng));
}

Vec point_at_distance(const ManifoldSpec& spec, const Vec& x, double dist, Rng& rng) {
  Vec v = random_tangent(spec, x, rng);
  v *= dist / norm(spec, v);
  return exp_map(spec, x, v);
}

Mat fd_geodesic_jacobian(const ManifoldSpec& spec, const Vec& x0, const Vec& x1, double t,
                         double h) {
  const Mat b1 = tangent_basis(spec, x1);
  const Mat bt = tangent_basis(spec, geodesic_interpolant(spec, x0, x1, t));
  Mat j(bt.cols(), b1.cols());
  for (Eigen::Index k = 0; k < b1.cols(); ++k) {
    const Vec plus = geodesic_interpolant(spec, x0, exp_map(spec, x1, h * b1.col(k)), t);
    const Vec minus = geodesic_interpolant(spec, x0, exp_map(spec, x1, -h * b1.col(k)), t);
    j.col(k) = coords(spec, bt, (plus - minus) / (2.0 * h));
  }
  return j;
}

Mat closed_form_jacobian(const ManifoldSpec& spec, const Vec& x0, const Vec& x1, double t) {
  const GeodesicFrame f = geodesic_frame(spec, x0, x1, t);
  const Mat b1 = tangent_basis(spec, x1);
  const Mat bt = tangent_basis(spec, f.xt);
  Mat j(bt.cols(), b1.cols());
  for (Eigen::Index k = 0; k < b1.cols(); ++k) j.col(k) = coords(spec, bt, jacobian_apply(spec, f, b1.col(k)));
  return j;
}

CheckResult check_drift_identity(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  const int d = 3;
  const Vec mu = standard_normal(rng, d);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec x0 = standard_normal(rng, d);
    const Vec x1 = mu + standard_normal(rng, d);
    const double t = uniform(rng, 0.01, 1.0);
    const double gamma = uniform(rng, 0.0, 2.0);
    const LinearSchedule sched{gamma};
    const Vec score1 = mu - x1;
    const Vec xt = interpolate(x0, x1, t);
    // Pushforward score of the conditional path: grad r(X1) / alpha_t.
    const Vec expected = conditional_velocity(xt, x0, t, sched) + 0.5 * sched.g2(t) * score1 / sched.alpha(t);
    worst = std::max(worst, (euclid_drift_target(x0, x1, score1, gamma) - expected).cwiseAbs().maxCoeff());
  }
  return make_result("drift_identity", worst, 1e-12, std::to_string(n) + " random (x0, x1, t)");
}

CheckResult check_jacobian_fd(int n, std::uint64_t seed, double h) {
  Rng rng = make_rng(seed, 2);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const bool sphere = i % 2 == 0;
    const ManifoldSpec spec = sphere ? ManifoldSpec::sphere(2) : ManifoldSpec::hyperboloid(2);
    const Config c = random_config(spec, rng, sphere ? 2.5 : 2.0, 0.05);
    const Mat diff = fd_geodesic_jacobian(spec, c.x0, c.x1, c.t, h) - closed_form_jacobian(spec, c.x0, c.x1, c.t);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return make_result("jacobian_fd", worst, 1e-5, std::to_string(n) + " configurations on S^2 and H^2");
}

CheckResult check_inv_adjoint_fd(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 3);
  const ManifoldSpec spec = ManifoldSpec::sphere(2);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Config c = random_config(spec, rng, 2.5, 0.05);
    const Mat j = fd_geodesic_jacobian(spec, c.x0, c.x1, c.t, 1e-4);
    const Mat b1 = tangent_basis(spec, c.x1);
    const Mat bt = tangent_basis(spec, geodesic_interpolant(spec, c.x0, c.x1, c.t));
    Vec w = random_tangent(spec, c.x1, rng);
    w /= norm(spec, w);
    const Vec expected = bt * (j.inverse().transpose() * coords(spec, b1, w));
    const Vec got = inv_jacobian_adjoint_apply(spec, c.x0, c.x1, c.t, w);
    worst = std::max(worst, (got - expected).norm());
  }
  return make_result("inv_jacobian_adjoint_fd", worst, 1e-4, std::to_string(n) + " configurations on S^2");
}

CheckResult check_logdet_fd(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 4);
  const ManifoldSpec spec = ManifoldSpec::sphere(2);
  const double h = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Config c = random_config(spec, rng, 2.5, 0.05);
    const Mat b1 = tangent_basis(spec, c.x1);
    Vec fd(b1.cols());
    for (Eigen::Index k = 0; k < b1.cols(); ++k) {
      const double fp = log_abs_det_fd(spec, c.x0, exp_map(spec, c.x1, h * b1.col(k)), c.t);
      const double fm = log_abs_det_fd(spec, c.x0, exp_map(spec, c.x1, -h * b1.col(k)), c.t);
      fd[k] = (fp - fm) / (2.0 * h);
    }
    const Vec got = coords(spec, b1, logdet_gradient(spec, c.x0, c.x1, c.t));
    worst = std::max(worst, (got - fd).cwiseAbs().maxCoeff());
  }
  return make_result("logdet_gradient_fd", worst, 1e-4, std::to_string(n) + " configurations on S^2");
}

CheckResult check_riemann_drift_fd(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 5);
  const ManifoldSpec spec = ManifoldSpec::sphere(2);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec mu = uniform_sphere_point(rng, 3);
    const double kappa = uniform(rng, 0.5, 5.0);
    const double gamma = uniform(rng, 0.1, 1.0);
    const Config c = random_config(spec, rng, 2.5, 0.2);
    const double ht = 1e-5;
    const Vec xdot = (geodesic_interpolant(spec, c.x0, c.x1, c.t + std::min(ht, 1.0 - c.t)) -
                      geodesic_interpolant(spec, c.x0, c.x1, c.t - ht)) /
                     (ht + std::min(ht, 1.0 - c.t));
    // log p_{t|0}(x) = r(phi^{-1}(x)) + log|det D phi^{-1}(x)|.
    auto log_density = [&](const Vec& x) {
      const Vec x1 = pull_back(spec, c.x0, x, c.t);
      const Mat b = tangent_basis(spec, x);
      const Mat bb = tangent_basis(spec, x1);
      Mat j(bb.cols(), b.cols());
      const double hi = 1e-4;
      for (Eigen::Index k = 0; k < b.cols(); ++k) {
        const Vec p = pull_back(spec, c.x0, exp_map(spec, x, hi * b.col(k)), c.t);
        const Vec m = pull_back(spec, c.x0, exp_map(spec, x, -hi * b.col(k)), c.t);
        j.col(k) = coords(spec, bb, (p - m) / (2.0 * hi));
      }
      return kappa * mu.dot(x1) + std::log(std::abs(j.determinant()));
    };
    const Vec xt = geodesic_interpolant(spec, c.x0, c.x1, c.t);
    const Mat bt = tangent_basis(spec, xt);
    const double h = 1e-3;
    Vec grad = Vec::Zero(3);
    for (Eigen::Index k = 0; k < bt.cols(); ++k) {
      const double g = (log_density(exp_map(spec, xt, h * bt.col(k))) -
                        log_density(exp_map(spec, xt, -h * bt.col(k)))) /
                       (2.0 * h);
      grad += g * bt.col(k);
    }
    const Vec expected = xdot + gamma * c.t * grad;
    const Vec got = riemann_drift_target(spec, c.x0, c.x1, kappa * mu, c.t, gamma);
    worst = std::max(worst, (got - expected).norm() / std::max(1.0, expected.norm()));
  }
  return make_result("riemann_drift_fd", worst, 1e-4, std::to_string(n) + " configurations on S^2");
}

CheckResult check_jacobi_ode(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 6);
  double worst = 0.0;
  const double h = 1e-3;
  for (int i = 0; i < n; ++i) {
    const bool sphere = i % 2 == 0;
    const ManifoldSpec spec = sphere ? ManifoldSpec::sphere(2, uniform(rng, 0.5, 2.0))
                                     : ManifoldSpec::hyperboloid(2, -uniform(rng, 0.5, 2.0));
    const double omega = uniform(rng, 0.05, 2.5 / std::sqrt(std::abs(spec.kappa)));
    const double t = uniform(rng, 0.1, 0.9);
    const double c = jacobian_scaling(spec, omega, t);
    const double c2 = (jacobian_scaling(spec, omega, t + h) - 2.0 * c + jacobian_scaling(spec, omega, t - h)) / (h * h);
    worst = std::max(worst, std::abs(c2 + spec.kappa * omega * omega * c));
  }
  return make_result("jacobi_ode", worst, 1e-4, std::to_string(n) + " (kappa, omega, t) draws");
}

CheckResult check_exp_log_roundtrip(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 7);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const bool sphere = i % 2 == 0;
    const ManifoldSpec spec = sphere ? ManifoldSpec::sphere(2) : ManifoldSpec::hyperboloid(2);
    const Vec x = random_manifold_point(spec, rng, 0.5);
    Vec v = random_tangent(spec, x, rng);
    v *= uniform(rng, 0.0, sphere ? M_PI - 0.1 : 10.0) / norm(spec, v);
    worst = std::max(worst, (log_map(spec, x, exp_map(spec, x, v)) - v).norm());
  }
  return make_result("exp_log_roundtrip", worst, 1e-8, std::to_string(n) + " draws on S^2 and H^2");
}

CheckResult check_transport_isometry(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 8);
  double iso = 0.0, align = 0.0;
  for (int i = 0; i < n; ++i) {
    const bool sphere = i % 2 == 0;
    const ManifoldSpec spec = sphere ? ManifoldSpec::sphere(2) : ManifoldSpec::hyperboloid(2);
    const Config c = random_config(spec, rng, sphere ? 2.5 : 2.0, 0.05);
    const Vec u = random_tangent(spec, c.x0, rng);
    const Vec w = random_tangent(spec, c.x0, rng);
    const Vec tu = parallel_transport(spec, c.x0, c.x1, u);
    const Vec tw = parallel_transport(spec, c.x0, c.x1, w);
    iso = std::max({iso, std::abs(inner(spec, tu, tw) - inner(spec, u, w)),
                    std::abs(inner(spec, tu, c.x1)) / std::max(1.0, norm(spec, u))});
    const GeodesicFrame f = geodesic_frame(spec, c.x0, c.x1, c.t);
    const Vec a = parallel_transport(spec, f.x1, f.xt, f.xdot1);
    const Vec perp = a - project_onto(spec, f.xdott, a);
    align = std::max(align, norm(spec, perp) / norm(spec, a));
  }
  std::ostringstream detail;
  detail << "sin(angle) between transported and true velocity " << align << " (limit 1e-8)";
  CheckResult r = make_result("transport_isometry", iso, 1e-10, detail.str());
  r.passed = r.passed && align < 1e-8;
  return r;
}

CheckResult check_constraint_drift(int steps, std::uint64_t seed) {
  double worst = 0.0;
  for (int kind = 0; kind < 2; ++kind) {
    const ManifoldSpec spec = kind == 0 ? ManifoldSpec::sphere(2) : ManifoldSpec::hyperboloid(2);
    Rng rng = make_rng(seed, 9 + kind);
    const Vec a = standard_normal(rng, 3);
    const DriftFn drift = [&](const Vec& x, double) {
      const Vec u = project_tangent(spec, x, a);
      return Vec(u / std::max(1.0, norm(spec, u)));
    };
    SolverConfig cfg;
    cfg.nfe = steps;
    cfg.gamma = 0.5;
    cfg.seed = seed;
    SolverStats stats;
    em_manifold(spec, drift, random_manifold_point(spec, rng, 0.5), cfg, 0, nullptr, &stats);
    worst = std::max(worst, stats.max_constraint_violation);
  }
  return make_result("constraint_drift", worst, 1e-6, std::to_string(steps) + " solver steps on S^2 and H^2");
}

SdeMarginalResult check_sde_marginal(int n_paths, int nfe, std::uint64_t seed) {
  const double mu = 3.0, tau2 = 0.25, gamma = 1.0;
  const BatchDriftFn drift = [&](const Mat& x, double t) {
    const double m = t * mu;
    const double s = (1 - t) * (1 - t) + t * t * tau2;
    const double ds = -2.0 * (1 - t) + 2.0 * t * tau2;
    const Mat v = (mu + (ds / (2.0 * s)) * (x.array() - m)).matrix();
    return Mat(v - gamma * t * ((x.array() - m) / s).matrix());
  };
  Rng rng = make_rng(seed, 11);
  Mat x0(1, n_paths);
  for (int j = 0; j < n_paths; ++j) x0(0, j) = standard_normal(rng, 1)[0];
  SolverConfig cfg;
  cfg.nfe = nfe;
  cfg.gamma = gamma;
  cfg.seed = seed;
  const BatchResult res = em_batch(drift, x0, StateSpace{}, cfg);
  const Eigen::ArrayXd x = res.x1.row(0).transpose().array();
  const double mean = x.mean();
  const double var = (x - mean).square().sum() / (n_paths - 1);
  const double se = std::sqrt(var / n_paths);
  SdeMarginalResult out;
  out.mean = make_result("sde_marginal_mean", std::abs(mean - mu) / se, 3.0,
                         "mean " + std::to_string(mean) + " (standard errors from 3)");
  out.variance = make_result("sde_marginal_variance", std::abs(var / tau2 - 1.0), 0.05,
                             "variance " + std::to_string(var) + " vs 0.25");
  return out;
}

CheckResult check_network_gradients(int n_nets, std::uint64_t seed) {
  Rng rng = make_rng(seed, 12);
  double worst = 0.0;
  for (int i = 0; i < n_nets; ++i) {
    const int data_dim = 2 + static_cast<int>(rng() % 3);
    std::vector<int> dims{data_dim};
    const int n_hidden = 1 + static_cast<int>(rng() % 3);
    for (int l = 0; l < n_hidden; ++l) dims.push_back(2 + static_cast<int>(rng() % 5));
    dims.push_back(data_dim);
    const Activation act = i % 2 == 0 ? Activation::kSiLU : Activation::kTanh;
    DriftModel model(dims, act, static_cast<int>(rng() % 3));
    model.initialize(rng());
    model.params() = 0.5 * standard_normal(rng, static_cast<int>(model.num_params()));

    const int n = 4;
    FsBatch batch{Mat(data_dim, n), Vec(n), Mat(data_dim, n)};
    OutputProjection proj;
    const int variant = i % 3;
    const ManifoldSpec sphere = ManifoldSpec::sphere(data_dim - 1);
    for (int j = 0; j < n; ++j) {
      batch.xt.col(j) = variant == 2 ? uniform_sphere_point(rng, data_dim) : standard_normal(rng, data_dim);
      batch.t[j] = uniform01(rng);
      batch.target.col(j) = standard_normal(rng, data_dim);
    }
    if (variant == 1 && data_dim % 2 == 0) proj = OutputProjection::zero_com({data_dim / 2, 2});
    if (variant == 2) proj = OutputProjection::tangent(sphere);

    const LossAndGrad lg = fs_loss_and_grad(model, batch, proj);
    Vec fd(lg.grad.size());
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < fd.size(); ++k) {
      DriftModel m = model;
      m.params()[k] += h;
      const double lp = fs_loss_and_grad(m, batch, proj).loss;
      m.params()[k] -= 2.0 * h;
      const double lm = fs_loss_and_grad(m, batch, proj).loss;
      fd[k] = (lp - lm) / (2.0 * h);
    }
    worst = std::max(worst, (lg.grad - fd).norm() / std::max(fd.norm(), 1e-8));
  }
  return make_result("network_gradients", worst, 1e-4, std::to_string(n_nets) + " random networks");
}

CheckResult check_target_scores(std::uint64_t seed) {
  Rng rng = make_rng(seed, 13);
  GmmParams gmm;
  gmm.centers.resize(4, 2);
  gmm.centers << 3, 3, 3, -3, -3, 3, -3, -3;
  VmfMixtureParams vmf;
  vmf.mus = Mat::Identity(3, 3);
  vmf.kappas = Vec::Constant(3, 20.0);
  LjParams lj;
  lj.n_particles = 5;
  const std::vector<TargetDensity> targets = {TargetDensity::gmm(gmm), TargetDensity::dw4({}),
                                              TargetDensity::lennard_jones(lj), TargetDensity::vmf_mixture(vmf)};
  double worst = 0.0;
  for (const auto& target : targets) {
    for (int rep = 0; rep < 5; ++rep) {
      const Vec x = 1.5 * standard_normal(rng, target.dim());
      const Vec g = target.score_uncounted(x);
      Vec fd(x.size());
      const double h = 1e-6 * std::max(1.0, x.norm());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vec p = x, m = x;
        p[k] += h;
        m[k] -= h;
        fd[k] = (target.reward(p) - target.reward(m)) / (2.0 * h);
      }
      worst = std::max(worst, (g - fd).norm() / std::max(1.0, fd.norm()));
    }
  }
  return make_result("target_scores", worst, 1e-5, "gmm, dw4, lj, vmf");
}

std::vector<CheckResult> run_verify_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto run = [&](const std::string& name, const std::function<std::vector<CheckResult>()>& f) {
    try {
      for (auto& r : f()) out.push_back(std::move(r));
    } catch (const std::exception& e) {
      out.push_back({name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, e.what()});
    }
  };
  run("drift_identity", [&] { return std::vector{check_drift_identity(1000, seed)}; });
  run("jacobian_fd", [&] { return std::vector{check_jacobian_fd(500, seed)}; });
  run("inv_adjoint_fd", [&] { return std::vector{check_inv_adjoint_fd(200, seed)}; });
  run("logdet_fd", [&] { return std::vector{check_logdet_fd(200, seed)}; });
  run("riemann_drift_fd", [&] { return std::vector{check_riemann_drift_fd(100, seed)}; });
  run("jacobi_ode", [&] { return std::vector{check_jacobi_ode(200, seed)}; });
  run("exp_log_roundtrip", [&] { return std::vector{check_exp_log_roundtrip(1000, seed)}; });
  run("transport_isometry", [&] { return std::vector{check_transport_isometry(1000, seed)}; });
  run("constraint_drift", [&] { return std::vector{check_constraint_drift(10000, seed)}; });
  run("sde_marginal", [&] {
    const auto sde = check_sde_marginal(20000, 512, seed);
    return std::vector{sde.mean, sde.variance};
  });
  run("network_gradients", [&] { return std::vector{check_network_gradients(20, seed)}; });
  run("target_scores", [&] { return std::vector{check_target_scores(seed)}; });
  return out;
}

}  // namespace fsamp
