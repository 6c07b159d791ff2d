// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "fsamp/checkpoint.hpp"
#include "fsamp/commands.hpp"
#include "fsamp/config.hpp"
#include "fsamp/metrics.hpp"
#include "fsamp/oracles.hpp"
#include "fsamp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;
using namespace fsamp;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << std::setw(2) << id << "  " << name << "  "
            << o.detail << "  (" << std::fixed << std::setprecision(1) << secs << " s)" << std::endl;
  std::cout.unsetf(std::ios::fixed);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

Outcome from_checks(const std::vector<CheckResult>& checks) {
  Outcome o{true, ""};
  for (const auto& c : checks) {
    o.passed = o.passed && c.passed;
    o.detail += c.name + "=" + fmt(c.value) + "/" + fmt(c.threshold) + " ";
  }
  return o;
}

// Wall-clock guard on top of the numeric checks.
Outcome within(Outcome o, double secs, double limit) {
  if (secs > limit) {
    o.passed = false;
    o.detail += "runtime " + fmt(secs) + " s exceeds " + fmt(limit) + " s";
  }
  return o;
}

template <class F>
std::pair<Outcome, double> timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o = f();
  return {o, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

fs::path work_dir() {
  const fs::path p = fs::temp_directory_path() / "fsamp_acceptance";
  fs::create_directories(p);
  return p;
}

RunConfig config_file(const std::string& name) {
  return load_config(std::string(FSAMP_SOURCE_DIR) + "/configs/" + name);
}

Checkpoint final_checkpoint(const fs::path& dir, const RunConfig& cfg) {
  return load_checkpoint((dir / ("ckpt_" + std::to_string(cfg.train.outer_loops) + ".fsmp")).string());
}

std::vector<double> energies(const TargetDensity& t, const Mat& rows) {
  std::vector<double> e(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) e[static_cast<std::size_t>(i)] = t.energy(rows.row(i).transpose());
  return e;
}

double brute_force_w2(const Mat& a, const Mat& b) {
  std::vector<int> p(static_cast<std::size_t>(a.rows()));
  std::iota(p.begin(), p.end(), 0);
  double best = 1e300;
  do {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += (a.row(i) - b.row(p[static_cast<std::size_t>(i)])).squaredNorm();
    best = std::min(best, s / static_cast<double>(a.rows()));
  } while (std::next_permutation(p.begin(), p.end()));
  return std::sqrt(best);
}

Mat random_rotation(int d, Rng& rng) {
  Mat a(d, d);
  for (int i = 0; i < d; ++i) a.col(i) = standard_normal(rng, d);
  Mat q = Eigen::HouseholderQR<Mat>(a).householderQ();
  if (q.determinant() < 0) q.col(0) *= -1;
  return q;
}

}  // namespace

int main() {
  const std::uint64_t seed = 20260101;
  const fs::path root = work_dir();

  report(1, "conditional drift identity", [&] {
    auto [o, s] = timed([&] { return from_checks({check_drift_identity(1000, seed)}); });
    return within(o, s, 1.0);
  });

  report(2, "geodesic Jacobian vs finite differences", [&] {
    auto [o, s] = timed([&] { return from_checks({check_jacobian_fd(500, seed + 1, 1e-4)}); });
    return within(o, s, 10.0);
  });

  report(3, "inverse adjoint and log-det gradient", [&] {
    return from_checks({check_inv_adjoint_fd(200, seed + 2), check_logdet_fd(200, seed + 3)});
  });

  report(4, "geometry suite", [&] {
    return from_checks({check_exp_log_roundtrip(1000, seed + 4), check_transport_isometry(1000, seed + 5),
                        check_constraint_drift(10000, seed + 6)});
  });

  report(5, "Gaussian path SDE marginal", [&] {
    auto [o, s] = timed([&] {
      const SdeMarginalResult r = check_sde_marginal(20000, 512, seed + 7);
      return from_checks({r.mean, r.variance});
    });
    return within(o, s, 30.0);
  });

  report(6, "reverse-mode gradients", [&] { return from_checks({check_network_gradients(20, seed + 8)}); });

  report(7, "score evaluation budget", [&] {
    RunConfig cfg = config_file("gmm.conf");
    cfg.train.outer_loops = 7;
    cfg.train.inner_loops = 5;
    cfg.train.new_samples_per_outer = 300;
    const TargetDensity target = make_target(cfg.target);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const TrainResult r = train(target, tc);
    const std::int64_t expected = 7 * 300;
    const bool ok = r.score_calls == expected && target.score_calls() == expected &&
                    r.metrics.back().score_calls_total == expected;
    return Outcome{ok, "calls=" + std::to_string(target.score_calls()) + " expected=" + std::to_string(expected)};
  });

  report(8, "GMM end to end", [&] {
    const RunConfig cfg = config_file("gmm.conf");
    const fs::path dir = root / "gmm";
    fs::remove_all(dir);
    run_training(cfg, dir.string());
    const Checkpoint ck = final_checkpoint(dir, cfg);
    const Mat gen = sample_checkpoint(ck, 10000, cfg.sample.nfe, seed + 9);
    const TargetDensity target = make_target(cfg.target);
    const Mat ref = exact_mixture_samples(target, 10000, seed + 10);
    double baseline = 0.0;
    for (int k = 0; k < 5; ++k) {
      baseline += energy_w2(target, exact_mixture_samples(target, 10000, seed + 100 + 2 * k),
                            exact_mixture_samples(target, 10000, seed + 101 + 2 * k));
    }
    baseline /= 5;
    const double w2 = energy_w2(target, gen, ref);
    const Vec shares = nearest_center_shares(gen, target.gmm_params().centers);
    bool ok = gen.rows() == 10000 && w2 < 2 * baseline;
    std::string detail = "energy_w2=" + fmt(w2) + " threshold=" + fmt(2 * baseline) + " shares=";
    for (Eigen::Index k = 0; k < shares.size(); ++k) {
      ok = ok && std::abs(shares[k] - 0.25) <= 0.10;
      detail += fmt(shares[k]) + (k + 1 < shares.size() ? "," : "");
    }
    return Outcome{ok, detail};
  });

  report(9, "DW-4 with adaptive noise", [&] {
    const RunConfig cfg = config_file("dw4.conf");
    const fs::path dir = root / "dw4";
    fs::remove_all(dir);
    if (cfg.train.gamma_mode != GammaMode::kAdaptive || cfg.train.gamma_c != 1.0) {
      return Outcome{false, "dw4.conf must use adaptive noise with c = 1"};
    }
    const TrainResult tr = run_training(cfg, dir.string());
    const Checkpoint ck = final_checkpoint(dir, cfg);
    const Mat gen = sample_checkpoint(ck, cfg.eval.n_reference, cfg.sample.nfe, seed + 11);
    const TargetDensity target = make_target(cfg.target);
    RunConfig a = cfg, b = cfg;
    a.seed = seed + 12;
    b.seed = seed + 13;
    const Mat ref = reference_samples(a, target);
    const Mat ref2 = reference_samples(b, target);
    const double baseline = energy_w2(target, ref, ref2);
    const double w2 = energy_w2(target, gen, ref);
    const bool ok = w2 <= 3 * baseline;
    return Outcome{ok, "energy_w2=" + fmt(w2) + " threshold=" + fmt(3 * baseline) + " gamma=" + fmt(tr.gamma)};
  });

  report(10, "sphere mixture", [&] {
    const RunConfig cfg = config_file("vmf.conf");
    const fs::path dir = root / "vmf";
    fs::remove_all(dir);
    run_training(cfg, dir.string());
    const Checkpoint ck = final_checkpoint(dir, cfg);
    const Mat gen = sample_checkpoint(ck, 10000, cfg.sample.nfe, seed + 14);
    const TargetDensity target = make_target(cfg.target);
    const Mat& mus = target.vmf_params().mus;
    const Vec w = sphere_mode_weights(gen, mus);
    const Mat means = sphere_mode_means(gen, mus);
    double max_dev = 0.0, max_angle = 0.0;
    for (Eigen::Index k = 0; k < mus.rows(); ++k) {
      max_dev = std::max(max_dev, std::abs(w[k] - 1.0 / static_cast<double>(mus.rows())));
      const double c = std::clamp(means.row(k).dot(mus.row(k)), -1.0, 1.0);
      max_angle = std::max(max_angle, std::acos(c) * 180.0 / M_PI);
    }
    // The same statistics on oracle draws bound what sampling noise alone produces.
    const Mat oracle = exact_mixture_samples(target, 10000, seed + 15);
    const Vec ow = sphere_mode_weights(oracle, mus);
    const double oracle_dev = (ow.array() - 1.0 / static_cast<double>(mus.rows())).abs().maxCoeff();
    const bool ok = mus.rows() == 6 && gen.rows() == 10000 && max_dev <= 0.05 && max_angle < 5.0;
    return Outcome{ok, "max_weight_dev=" + fmt(max_dev) + " (oracle " + fmt(oracle_dev) +
                           ") max_angle_deg=" + fmt(max_angle)};
  });

  report(11, "metric self-tests", [&] {
    Rng rng = make_rng(seed + 16);
    double assign_err = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Mat a(3, 2), b(3, 2);
      for (int i = 0; i < 3; ++i) {
        a.row(i) = standard_normal(rng, 2).transpose();
        b.row(i) = standard_normal(rng, 2).transpose();
      }
      assign_err = std::max(assign_err, std::abs(w2_assignment(a, b) - brute_force_w2(a, b)));
    }
    double align_err = 0.0;
    for (const ParticleLayout l : {ParticleLayout{4, 2}, ParticleLayout{13, 3}}) {
      for (int t = 0; t < 50; ++t) {
        const Vec x = standard_normal(rng, l.n_particles * l.spatial);
        std::vector<int> perm(static_cast<std::size_t>(l.n_particles));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const Mat r = random_rotation(l.spatial, rng);
        Vec y(x.size());
        for (int i = 0; i < l.n_particles; ++i)
          y.segment(i * l.spatial, l.spatial) = r * x.segment(perm[static_cast<std::size_t>(i)] * l.spatial, l.spatial);
        align_err = std::max(align_err, aligned_distance(x, y, l));
      }
    }
    Mat p(2000, 2), q(2000, 2);
    for (int i = 0; i < 2000; ++i) {
      p.row(i) << -1 + uniform01(rng), -1 + 2 * uniform01(rng);
      q.row(i) << 0.01 + 0.98 * uniform01(rng), -1 + 2 * uniform01(rng);
    }
    const double jsd = jsd_2d_hist(p, q, 200, {-1, 1}, {-1, 1});
    const double jsd_err = std::abs(jsd - std::log(2.0));
    const bool ok = assign_err < 1e-12 && align_err < 1e-8 && jsd_err < 1e-6;
    return Outcome{ok, "assignment_err=" + fmt(assign_err) + " aligned=" + fmt(align_err) +
                           " jsd_gap=" + fmt(jsd_err)};
  });

  report(12, "bitwise determinism of training", [&] {
    const fs::path dir = root / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig cfg = config_file("gmm.conf");
    cfg.train.outer_loops = 4;
    cfg.train.inner_loops = 20;
    cfg.train.new_samples_per_outer = 256;
    const fs::path conf = dir / "run.conf";
    std::ofstream(conf) << render_config(cfg);
    std::ostringstream log, err;
    TrainArgs args;
    args.config = conf.string();
    args.out = (dir / "a").string();
    if (cmd_train(args, log, err) != kExitOk) return Outcome{false, "first run failed: " + err.str()};
    args.out = (dir / "b").string();
    if (cmd_train(args, log, err) != kExitOk) return Outcome{false, "second run failed: " + err.str()};
    auto bytes = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    int compared = 0;
    bool same = true;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
      const std::string name = entry.path().filename().string();
      if (name == "config.resolved") continue;
      same = same && fs::exists(dir / "b" / name) && bytes(entry.path()) == bytes(dir / "b" / name);
      ++compared;
    }
    return Outcome{same && compared == 5, std::to_string(compared) + " files compared"};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
