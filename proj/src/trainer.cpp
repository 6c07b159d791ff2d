#include "fsamp/trainer.hpp"

#include "fsamp/error.hpp"
#include "fsamp/oracles.hpp"
#include "fsamp/process.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace fsamp {

namespace {

// Stream tags keep the random sources of each phase independent.
constexpr std::uint64_t kSourceStream = 0x736f75726365ULL;
constexpr std::uint64_t kOptimizeStream = 0x6f7074696dULL;
constexpr std::uint64_t kExploreSeedMix = 0x9E3779B97F4A7C15ULL;
constexpr int kSampleChunk = 256;

std::uint64_t explore_seed(std::uint64_t seed, std::uint64_t round) {
  std::uint64_t z = seed + kExploreSeedMix * (round + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void require_positive(int v, const char* name) {
  if (v < 1) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must be >= 1");
  }
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::kInvalidArgument, "buffer capacity must be >= 1");
  entries_.reserve(capacity);
}

void ReplayBuffer::push(Vec x1, Vec score1) {
  ++inserted_;
  if (entries_.size() < capacity_) {
    entries_.push_back({std::move(x1), std::move(score1)});
    return;
  }
  entries_[head_] = {std::move(x1), std::move(score1)};
  head_ = (head_ + 1) % capacity_;
}

const ReplayBuffer::Entry& ReplayBuffer::at(std::size_t i) const {
  if (i >= entries_.size()) throw Error(ErrorCode::kInvalidArgument, "buffer index out of range");
  return entries_[(head_ + i) % entries_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  if (entries_.empty()) throw Error(ErrorCode::kEmptyInput, "cannot sample an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

void TrainConfig::validate() const {
  if (outer_loops < 0 || inner_loops < 0) {
    throw Error(ErrorCode::kInvalidArgument, "loop counts must be >= 0");
  }
  require_positive(batch_size, "batch_size");
  require_positive(buffer_capacity, "buffer_capacity");
  require_positive(new_samples_per_outer, "new_samples_per_outer");
  require_positive(nfe_train, "nfe_train");
  if (!(t_min > 0.0 && t_min < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "t_min must lie in (0, 1)");
  }
  if (gamma < 0.0 || gamma_c <= 0.0 || gamma_eps < 0.0 || lr <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid gamma or learning-rate settings");
  }
}

StateSpace state_space_for(const TargetDensity& target) {
  StateSpace s;
  s.manifold = target.manifold();
  s.com = target.particles();
  return s;
}

OutputProjection output_projection_for(const StateSpace& space) {
  if (space.manifold) return OutputProjection::tangent(*space.manifold);
  if (space.com) return OutputProjection::zero_com(*space.com);
  return OutputProjection::none();
}

SamplingContext sampling_context_for(const StateSpace& space, double gamma) {
  SamplingContext ctx;
  ctx.gamma = gamma;
  if (space.manifold) {
    ctx.manifold_kind = space.manifold->kind;
    ctx.kappa = space.manifold->kappa;
  }
  if (space.com) {
    ctx.com_particles = space.com->n_particles;
    ctx.com_spatial = space.com->spatial;
  }
  return ctx;
}

StateSpace state_space_from(const SamplingContext& ctx, int data_dim) {
  StateSpace s;
  switch (ctx.manifold_kind) {
    case ManifoldKind::kSphere:
      s.manifold = ManifoldSpec::sphere(data_dim - 1, ctx.kappa);
      break;
    case ManifoldKind::kHyperboloid:
      s.manifold = ManifoldSpec::hyperboloid(data_dim - 1, ctx.kappa);
      break;
    case ManifoldKind::kEuclidean:
      break;
  }
  if (ctx.com_particles > 0) {
    if (ctx.com_particles * ctx.com_spatial != data_dim) {
      throw Error(ErrorCode::kCheckpoint, "particle layout does not match model dimension");
    }
    s.com = ParticleLayout{ctx.com_particles, ctx.com_spatial};
  }
  return s;
}

Mat draw_source(const StateSpace& space, int dim, int n, Rng& rng) {
  Mat x(dim, n);
  for (int j = 0; j < n; ++j) {
    if (space.manifold && space.manifold->kind == ManifoldKind::kSphere) {
      x.col(j) = uniform_sphere_point(rng, dim) / std::sqrt(space.manifold->kappa);
    } else if (space.manifold) {
      const ManifoldSpec& m = *space.manifold;
      const Vec o = manifold_origin(m);
      x.col(j) = exp_map(m, o, project_tangent(m, o, standard_normal(rng, dim)));
    } else {
      Vec z = standard_normal(rng, dim);
      x.col(j) = space.com ? zero_com_project(z, *space.com) : z;
    }
  }
  return x;
}

int worker_threads() {
  if (const char* env = std::getenv("FS_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BatchResult generate_samples(const DriftModel& model, const StateSpace& space,
                             double gamma, int n, int nfe, std::uint64_t seed) {
  const int dim = model.output_dim();
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 0");
  Rng src = make_rng(seed, kSourceStream);
  const Mat x0 = draw_source(space, dim, n, src);
  const OutputProjection proj = output_projection_for(space);
  const BatchDriftFn drift = [&](const Mat& x, double t) {
    Mat u = model.forward(x, Vec::Constant(x.cols(), t));
    if (proj.kind != OutputProjection::Kind::kNone) {
      for (Eigen::Index j = 0; j < u.cols(); ++j) u.col(j) = proj.apply(x.col(j), u.col(j));
    }
    return u;
  };
  SolverConfig cfg;
  cfg.nfe = nfe;
  cfg.gamma = gamma;
  cfg.seed = seed;

  const int n_chunks = (n + kSampleChunk - 1) / kSampleChunk;
  std::vector<BatchResult> parts(static_cast<std::size_t>(n_chunks));
  auto run_chunk = [&](int c) {
    const int begin = c * kSampleChunk;
    const int width = std::min(kSampleChunk, n - begin);
    parts[static_cast<std::size_t>(c)] =
        em_batch(drift, x0.middleCols(begin, width), space, cfg, static_cast<std::uint64_t>(begin));
  };
  const int threads = std::min(worker_threads(), n_chunks);
  if (threads <= 1) {
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int c = w; c < n_chunks; c += threads) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  BatchResult out;
  out.x1.resize(dim, n);
  out.ok.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < n_chunks; ++c) {
    const auto& p = parts[static_cast<std::size_t>(c)];
    out.x1.middleCols(c * kSampleChunk, p.x1.cols()) = p.x1;
    out.ok.insert(out.ok.end(), p.ok.begin(), p.ok.end());
    out.diverged += p.diverged;
    out.stats.max_constraint_violation =
        std::max(out.stats.max_constraint_violation, p.stats.max_constraint_violation);
  }
  return out;
}

double adaptive_gamma(const ReplayBuffer& buffer, double c, double eps) {
  if (buffer.empty()) throw Error(ErrorCode::kEmptyInput, "adaptive_gamma: empty buffer");
  double acc = 0.0;
  for (std::size_t i = 0; i < buffer.size(); ++i) acc += buffer.at(i).score1.squaredNorm();
  return c / std::sqrt(acc / static_cast<double>(buffer.size()) + eps);
}

ExploreStats explore(const DriftModel& model, const TargetDensity& target,
                     ReplayBuffer& buffer, const TrainConfig& cfg, double gamma,
                     std::uint64_t round) {
  if (model.output_dim() != target.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "explore: model and target dimensions differ");
  }
  const StateSpace space = state_space_for(target);
  const BatchResult res = generate_samples(model, space, gamma, cfg.new_samples_per_outer,
                                           cfg.nfe_train, explore_seed(cfg.seed, round));
  ExploreStats stats;
  for (Eigen::Index j = 0; j < res.x1.cols(); ++j) {
    if (!res.ok[static_cast<std::size_t>(j)]) {
      ++stats.dropped;
      continue;
    }
    Vec x1 = res.x1.col(j);
    Vec s = target.score(x1);
    if (!s.allFinite()) {
      ++stats.dropped;
      continue;
    }
    if (cfg.clip_threshold > 0.0) s = clip_score(s, cfg.clip_threshold);
    buffer.push(std::move(x1), std::move(s));
    ++stats.inserted;
  }
  return stats;
}

double optimize(DriftModel& model, AdamState& adam, const ReplayBuffer& buffer,
                const TargetDensity& target, const TrainConfig& cfg, double gamma,
                std::uint64_t round) {
  if (cfg.inner_loops == 0) return 0.0;
  if (buffer.empty()) throw Error(ErrorCode::kEmptyInput, "optimize: empty buffer");
  const StateSpace space = state_space_for(target);
  const OutputProjection proj = output_projection_for(space);
  const int dim = target.dim();
  const int bz = cfg.batch_size;
  Rng rng = make_rng(cfg.seed, kOptimizeStream + round);
  std::uniform_real_distribution<double> time_dist(cfg.t_min, 1.0);

  double loss_sum = 0.0;
  for (int it = 0; it < cfg.inner_loops; ++it) {
    const auto idx = buffer.sample_indices(static_cast<std::size_t>(bz), rng);
    Mat x0 = draw_source(space, dim, bz, rng);
    FsBatch batch{Mat(dim, bz), Vec(bz), Mat(dim, bz)};
    for (int j = 0; j < bz; ++j) {
      const auto& e = buffer.at(idx[static_cast<std::size_t>(j)]);
      const double t = time_dist(rng);
      batch.t[j] = t;
      if (space.manifold) {
        const ManifoldSpec& m = *space.manifold;
        // Redraw the source point on the (measure-zero) cut locus of x1.
        while (m.kind == ManifoldKind::kSphere &&
               1.0 + m.kappa * inner(m, x0.col(j), e.x1) < 1e-6) {
          x0.col(j) = draw_source(space, dim, 1, rng).col(0);
        }
        const GeodesicFrame frame = geodesic_frame(m, x0.col(j), e.x1, t);
        batch.xt.col(j) = frame.xt;
        batch.target.col(j) = riemann_drift_target(m, frame, e.score1, gamma);
      } else {
        batch.xt.col(j) = interpolate(x0.col(j), e.x1, t);
        batch.target.col(j) = euclid_drift_target(x0.col(j), e.x1, e.score1, gamma);
      }
    }
    const LossAndGrad lg = fs_loss_and_grad(model, batch, proj);
    adam_step(adam, model.params(), lg.grad);
    loss_sum += lg.loss;
  }
  return loss_sum / cfg.inner_loops;
}

TrainResult train(const TargetDensity& target, const TrainConfig& cfg,
                  const RoundCallback& on_round) {
  cfg.validate();
  const StateSpace space = state_space_for(target);
  TrainResult result;
  result.model = DriftModel::create(target.dim(), target.dim(), cfg.model, cfg.seed);
  result.gamma = cfg.gamma;
  AdamState adam(result.model.num_params(), cfg.lr);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  const std::int64_t calls_before = target.score_calls();
  const auto start = std::chrono::steady_clock::now();

  double gamma = cfg.gamma;
  for (int round = 1; round <= cfg.outer_loops; ++round) {
    RoundMetrics m;
    m.round = round;
    try {
      const ExploreStats es = explore(result.model, target, buffer, cfg, gamma,
                                      static_cast<std::uint64_t>(round));
      m.dropped = es.dropped;
      if (cfg.gamma_mode == GammaMode::kAdaptive && !buffer.empty()) {
        gamma = adaptive_gamma(buffer, cfg.gamma_c, cfg.gamma_eps);
      }
      m.loss_mean = optimize(result.model, adam, buffer, target, cfg, gamma,
                             static_cast<std::uint64_t>(round));
    } catch (const Error& e) {
      throw Error(e.code(), "round " + std::to_string(round) + ": " + e.what());
    }
    m.gamma = gamma;
    m.buffer_len = buffer.size();
    m.score_calls_total = target.score_calls() - calls_before;
    m.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.gamma = gamma;
    result.metrics.push_back(m);
    if (on_round) on_round(m, result.model, sampling_context_for(space, gamma));
  }
  result.score_calls = target.score_calls() - calls_before;
  return result;
}

}  // namespace fsamp
