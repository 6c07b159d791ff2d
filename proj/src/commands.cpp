#include "fsamp/commands.hpp"

#include "fsamp/checkpoint.hpp"
#include "fsamp/error.hpp"
#include "fsamp/metrics.hpp"
#include "fsamp/oracles.hpp"
#include "fsamp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

namespace fsamp {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kReferenceSeedMix = 0x7265666572656e63ULL;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

Mat head_rows(const Mat& m, Eigen::Index n) { return m.topRows(std::min(n, m.rows())); }

double sphere_distance(const Vec& a, const Vec& b) {
  return std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
}

std::vector<double> energies(const TargetDensity& target, const Mat& rows) {
  std::vector<double> e(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) e[static_cast<std::size_t>(i)] = target.energy(rows.row(i).transpose());
  return e;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
      return kExitUsage;
    case ErrorCode::kCheckpoint:
      return kExitCheckpoint;
    default:
      return kExitFailure;
  }
}

TrainResult run_training(const RunConfig& cfg, const std::string& out_dir) {
  const fs::path dir(out_dir);
  ensure_dir(dir);
  RunConfig resolved = cfg;
  resolved.out_dir = out_dir;
  write_text(dir / "config.resolved", render_config(resolved));

  const TargetDensity target = make_target(cfg.target);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;

  std::ofstream metrics(dir / "metrics.csv");
  if (!metrics) throw Error(ErrorCode::kIo, "cannot write metrics.csv in " + out_dir);
  metrics << "round,loss_mean,gamma,buffer_len,score_calls_total,wallclock_s\n" << std::setprecision(17);

  const auto on_round = [&](const RoundMetrics& m, const DriftModel& model, const SamplingContext& ctx) {
    metrics << m.round << ',' << m.loss_mean << ',' << m.gamma << ',' << m.buffer_len << ','
            << m.score_calls_total << ',' << (cfg.log_wallclock ? m.wallclock_s : 0.0) << '\n';
    metrics.flush();
    const bool last = m.round == tc.outer_loops;
    if (last || (cfg.checkpoint_every > 0 && m.round % cfg.checkpoint_every == 0)) {
      save_checkpoint((dir / ("ckpt_" + std::to_string(m.round) + ".fsmp")).string(), model, ctx);
    }
  };
  TrainResult result = train(target, tc, on_round);
  if (tc.outer_loops == 0) {
    save_checkpoint((dir / "ckpt_0.fsmp").string(), result.model,
                    sampling_context_for(state_space_for(target), result.gamma));
  }
  if (!metrics) throw Error(ErrorCode::kIo, "failed writing metrics.csv");
  return result;
}

Mat sample_checkpoint(const Checkpoint& ck, int n, int nfe, std::uint64_t seed, int* dropped) {
  const int dim = ck.model.output_dim();
  const StateSpace space = state_space_from(ck.context, dim);
  const BatchResult res = generate_samples(ck.model, space, ck.context.gamma, n, nfe, seed);
  Mat rows(n - res.diverged, dim);
  Eigen::Index r = 0;
  for (int j = 0; j < n; ++j) {
    if (res.ok[static_cast<std::size_t>(j)]) rows.row(r++) = res.x1.col(j).transpose();
  }
  if (dropped != nullptr) *dropped = res.diverged;
  return rows;
}

Mat reference_samples(const RunConfig& cfg, const TargetDensity& target) {
  const std::uint64_t seed = cfg.seed ^ kReferenceSeedMix;
  if (target.kind() == TargetKind::kGmm || target.kind() == TargetKind::kVmfMixture) {
    return exact_mixture_samples(target, cfg.eval.n_reference, seed);
  }
  LangevinConfig lc = cfg.eval.langevin;
  lc.n_samples = cfg.eval.n_reference;
  lc.seed = seed;
  return langevin_reference(target, lc).samples;
}

std::vector<EvalRow> evaluate(const RunConfig& cfg, const TargetDensity& target, const Mat& samples,
                              const Mat& reference, std::uint64_t seed) {
  for (const Mat* m : {&samples, &reference}) {
    if (m->cols() != target.dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "eval: samples have " + std::to_string(m->cols()) +
                                                     " columns, target dimension is " + std::to_string(target.dim()));
    }
  }
  if (samples.rows() == 0 || reference.rows() == 0) throw Error(ErrorCode::kEmptyInput, "eval: no samples");
  const int n = static_cast<int>(samples.rows());
  std::vector<EvalRow> rows;
  auto add = [&](const std::string& name, double value, int count) { rows.push_back({name, value, count, seed}); };
  const auto metrics = cfg.eval.metrics.empty() ? default_metrics(target.kind()) : cfg.eval.metrics;
  for (const auto& metric : metrics) {
    if (metric == "energy_w2") {
      add(metric, energy_w2(target, samples, reference), n);
    } else if (metric == "energy_kl") {
      const auto eg = energies(target, samples);
      const auto er = energies(target, reference);
      const auto [lo, hi] = std::minmax_element(er.begin(), er.end());
      const double pad = 1e-9 * std::max(1.0, std::abs(*hi - *lo));
      add(metric, kl_1d_hist(eg, er, cfg.eval.hist_bins, {*lo - pad, *hi + pad}), n);
    } else if (metric == "w2") {
      const Eigen::Index k = std::min<Eigen::Index>({cfg.eval.w2_subset, samples.rows(), reference.rows()});
      const PairDistance dist = target.manifold() ? PairDistance(sphere_distance) : PairDistance(euclidean_distance);
      add(metric, w2_assignment(head_rows(samples, k), head_rows(reference, k), dist), static_cast<int>(k));
    } else if (metric == "aligned_w2") {
      const auto layout = target.particles();
      if (!layout) throw Error(ErrorCode::kConfig, "eval: aligned_w2 requires a particle target");
      const Eigen::Index k = std::min<Eigen::Index>({cfg.eval.aligned_subset, samples.rows(), reference.rows()});
      const PairDistance dist = [&](const Vec& a, const Vec& b) { return aligned_distance(a, b, *layout); };
      add(metric, w2_assignment(head_rows(samples, k), head_rows(reference, k), dist), static_cast<int>(k));
    } else if (metric == "jsd_2d") {
      if (target.dim() < 2) throw Error(ErrorCode::kConfig, "eval: jsd_2d requires dimension >= 2");
      const Mat a = samples.leftCols(2), b = reference.leftCols(2);
      Mat both(a.rows() + b.rows(), 2);
      both << a, b;
      const Vec lo = both.colwise().minCoeff(), hi = both.colwise().maxCoeff();
      add(metric, jsd_2d_hist(a, b, cfg.eval.hist_bins, {lo[0], hi[0]}, {lo[1], hi[1]}), n);
    } else if (metric == "mode_weights") {
      Mat centers;
      Vec expected;
      Vec shares;
      if (target.kind() == TargetKind::kGmm) {
        centers = target.gmm_params().centers;
        expected = target.gmm_params().weights;
        shares = nearest_center_shares(samples, centers);
      } else if (target.kind() == TargetKind::kVmfMixture) {
        centers = target.vmf_params().mus;
        expected = target.vmf_params().weights;
        shares = sphere_mode_weights(samples, centers);
      } else {
        throw Error(ErrorCode::kConfig, "eval: mode_weights requires a gmm or vmf target");
      }
      for (Eigen::Index k = 0; k < shares.size(); ++k) add("mode_weight_" + std::to_string(k), shares[k], n);
      add("mode_weight_max_dev", (shares - expected).cwiseAbs().maxCoeff(), n);
      if (target.kind() == TargetKind::kVmfMixture) {
        const Mat means = sphere_mode_means(samples, centers);
        double worst = 0.0;
        for (Eigen::Index k = 0; k < centers.rows(); ++k) {
          const double deg = means.row(k).norm() > 0
                                 ? sphere_distance(means.row(k).transpose(), centers.row(k).transpose()) * 180.0 / M_PI
                                 : 180.0;
          add("mode_angle_deg_" + std::to_string(k), deg, n);
          worst = std::max(worst, deg);
        }
        add("mode_angle_deg_max", worst, n);
      }
    } else {
      throw Error(ErrorCode::kConfig, "eval: unknown metric '" + metric + "'");
    }
  }
  return rows;
}

int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_config(args.config);
    if (args.seed) {
      cfg.seed = *args.seed;
      cfg.train.seed = *args.seed;
    }
    const std::string out = args.out ? *args.out : resolved_out_dir(cfg);
    const TrainResult res = run_training(cfg, out);
    log << "trained " << res.metrics.size() << " rounds, " << res.score_calls << " score evaluations, gamma "
        << res.gamma << "; outputs in " << out << '\n';
    return kExitOk;
  });
}

int cmd_sample(const SampleArgs& args, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (args.n < 0) throw Error(ErrorCode::kInvalidArgument, "--n must be >= 0");
    if (args.nfe < 1) throw Error(ErrorCode::kInvalidArgument, "--nfe must be >= 1");
    const Checkpoint ck = load_checkpoint(args.checkpoint);
    int dropped = 0;
    const Mat rows = sample_checkpoint(ck, args.n, args.nfe, args.seed, &dropped);
    if (const auto parent = fs::path(args.out).parent_path(); !parent.empty()) ensure_dir(parent);
    write_samples_csv(args.out, rows);
    if (dropped > 0) err << "warning: dropped " << dropped << " divergent trajectories\n";
    log << "wrote " << rows.rows() << " samples to " << args.out << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_config(args.config);
    if (args.seed) cfg.seed = *args.seed;
    const TargetDensity target = make_target(cfg.target);
    const Mat samples = read_samples_csv(args.samples);
    const Mat reference = args.reference ? read_samples_csv(*args.reference) : reference_samples(cfg, target);
    const auto rows = evaluate(cfg, target, samples, reference, cfg.seed);
    fs::path out;
    if (args.out) {
      out = *args.out;
    } else {
      out = fs::path(resolved_out_dir(cfg)) / ("eval_" + fs::path(args.samples).stem().string() + ".csv");
    }
    if (!out.parent_path().empty()) ensure_dir(out.parent_path());
    write_eval_csv(out.string(), rows);
    log << std::setprecision(6);
    for (const auto& r : rows) log << r.metric << " = " << r.value << " (n=" << r.n_samples << ")\n";
    log << "wrote " << out.string() << '\n';
    return kExitOk;
  });
}

int cmd_verify(std::uint64_t seed, std::ostream& log) {
  int failed = 0;
  for (const auto& r : run_verify_suite(seed)) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name << "  value=" << std::setprecision(3) << r.value
        << " limit=" << r.threshold;
    if (!r.detail.empty()) log << "  (" << r.detail << ')';
    log << '\n';
    if (!r.passed) ++failed;
  }
  log << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace fsamp
