#include "fsamp/sde.hpp"

#include "fsamp/error.hpp"
#include "fsamp/random.hpp"

#include <cmath>
#include <iomanip>

namespace fsamp {

namespace {

void check_finite(const Vec& x, int step) {
  if (!x.allFinite()) {
    throw Error(ErrorCode::kDivergence,
                "solver diverged at step " + std::to_string(step));
  }
}

void record(Trajectory* path, double t, const Vec& x) {
  if (path == nullptr) return;
  path->t.push_back(t);
  path->x.push_back(x);
}

}  // namespace

double SolverConfig::step() const { return (1.0 - t_start) / nfe; }

void SolverConfig::validate() const {
  if (nfe < 1) throw Error(ErrorCode::kInvalidArgument, "solver: nfe must be >= 1");
  if (!(t_start >= 0.0 && t_start < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "solver: t_start must lie in [0, 1)");
  }
  if (gamma < 0.0) throw Error(ErrorCode::kInvalidArgument, "solver: gamma must be >= 0");
}

Vec em_euclid(const DriftFn& drift, const Vec& x0, const SolverConfig& cfg,
              std::uint64_t stream, Trajectory* path) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, stream);
  const double h = cfg.step();
  Vec x = x0;
  record(path, cfg.t_start, x);
  for (int k = 0; k < cfg.nfe; ++k) {
    const double t = cfg.t_start + k * h;
    const Vec z = standard_normal(rng, static_cast<int>(x.size()));
    x += h * drift(x, t) + std::sqrt(2.0 * cfg.gamma * t * h) * z;
    check_finite(x, k);
    record(path, t + h, x);
  }
  return x;
}

Vec em_manifold(const ManifoldSpec& spec, const DriftFn& drift, const Vec& x0,
                const SolverConfig& cfg, std::uint64_t stream, Trajectory* path,
                SolverStats* stats) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, stream);
  const double h = cfg.step();
  Vec x = renormalize(spec, x0);
  record(path, cfg.t_start, x);
  for (int k = 0; k < cfg.nfe; ++k) {
    const double t = cfg.t_start + k * h;
    const Vec z = standard_normal(rng, static_cast<int>(x.size()));
    const Vec step = project_tangent(
        spec, x, h * drift(x, t) + std::sqrt(2.0 * cfg.gamma * t * h) * z);
    const Vec raw = exp_map_unnormalized(spec, x, step);
    check_finite(raw, k);
    if (stats != nullptr) {
      stats->max_constraint_violation =
          std::max(stats->max_constraint_violation, constraint_violation(spec, raw));
    }
    x = renormalize(spec, raw);
    record(path, t + h, x);
  }
  return x;
}

BatchResult em_batch(const BatchDriftFn& drift, const Mat& x0, const StateSpace& space,
                     const SolverConfig& cfg, std::uint64_t first_stream) {
  cfg.validate();
  const auto n = x0.cols();
  const auto d = static_cast<int>(x0.rows());
  const double h = cfg.step();
  std::vector<Rng> rngs;
  rngs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    rngs.push_back(make_rng(cfg.seed, first_stream + static_cast<std::uint64_t>(j)));
  }
  BatchResult res;
  res.x1 = x0;
  res.ok.assign(static_cast<std::size_t>(n), 1);
  if (space.manifold) {
    for (Eigen::Index j = 0; j < n; ++j) {
      res.x1.col(j) = renormalize(*space.manifold, res.x1.col(j));
    }
  }
  for (int k = 0; k < cfg.nfe; ++k) {
    const double t = cfg.t_start + k * h;
    const double noise = std::sqrt(2.0 * cfg.gamma * t * h);
    const Mat u = drift(res.x1, t);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vec z = standard_normal(rngs[static_cast<std::size_t>(j)], d);
      if (!res.ok[static_cast<std::size_t>(j)]) continue;
      Vec inc = h * u.col(j) + noise * z;
      if (space.com) inc = zero_com_project(inc, *space.com);
      Vec next;
      if (space.manifold) {
        const ManifoldSpec& m = *space.manifold;
        const Vec x = res.x1.col(j);
        next = exp_map_unnormalized(m, x, project_tangent(m, x, inc));
        if (next.allFinite()) {
          res.stats.max_constraint_violation =
              std::max(res.stats.max_constraint_violation, constraint_violation(m, next));
          next = renormalize(m, next);
        }
      } else {
        next = res.x1.col(j) + inc;
      }
      if (!next.allFinite()) {
        res.ok[static_cast<std::size_t>(j)] = 0;
        ++res.diverged;
        res.x1.col(j) = x0.col(j);
        continue;
      }
      res.x1.col(j) = next;
    }
  }
  return res;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& path) {
  out << "t";
  const auto d = path.x.empty() ? 0 : path.x.front().size();
  for (Eigen::Index i = 0; i < d; ++i) out << ",x" << i;
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < path.t.size(); ++k) {
    out << path.t[k];
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << path.x[k][i];
    out << '\n';
  }
}

}  // namespace fsamp
