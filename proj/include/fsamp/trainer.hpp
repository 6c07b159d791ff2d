#pragma once

#include "fsamp/checkpoint.hpp"
#include "fsamp/net.hpp"
#include "fsamp/random.hpp"
#include "fsamp/sde.hpp"
#include "fsamp/targets.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace fsamp {

// Bounded FIFO of (x1, score(x1)) pairs. Sampling is uniform with replacement.
class ReplayBuffer {
 public:
  struct Entry {
    Vec x1;
    Vec score1;
  };

  explicit ReplayBuffer(std::size_t capacity);

  void push(Vec x1, Vec score1);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  std::uint64_t total_inserted() const { return inserted_; }

  // i = 0 is the oldest live entry.
  const Entry& at(std::size_t i) const;
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Entry> entries_;  // ring storage
  std::size_t head_ = 0;        // oldest entry once full
  std::uint64_t inserted_ = 0;
};

enum class GammaMode { kFixed, kAdaptive };

struct TrainConfig {
  int outer_loops = 5000;
  int inner_loops = 200;
  int batch_size = 512;
  int buffer_capacity = 10000;
  int new_samples_per_outer = 1024;
  int nfe_train = 128;
  GammaMode gamma_mode = GammaMode::kFixed;
  double gamma = 1.0;       // fixed value, and the first exploration's value when adaptive
  double gamma_c = 1.0;
  double gamma_eps = 1e-8;
  double clip_threshold = 100.0;  // <= 0 disables clipping
  double t_min = 1e-3;
  double lr = 3e-4;
  std::uint64_t seed = 0;
  ModelConfig model;

  void validate() const;
};

// State space, source distribution, and output projection implied by a target.
StateSpace state_space_for(const TargetDensity& target);
OutputProjection output_projection_for(const StateSpace& space);
SamplingContext sampling_context_for(const StateSpace& space, double gamma);
StateSpace state_space_from(const SamplingContext& ctx, int data_dim);

// Source p0: standard normal, mean-free normal for particles, uniform on the
// sphere, wrapped normal at the origin on the hyperboloid. Columns are draws.
Mat draw_source(const StateSpace& space, int dim, int n, Rng& rng);

// Simulates n trajectories of the detached model from the source with noise
// scale gamma. Deterministic for a given seed. Divergent trajectories are
// reported through `ok`.
BatchResult generate_samples(const DriftModel& model, const StateSpace& space,
                             double gamma, int n, int nfe, std::uint64_t seed);

double adaptive_gamma(const ReplayBuffer& buffer, double c, double eps);

struct ExploreStats {
  int inserted = 0;
  int dropped = 0;
};

// Exploration phase: one score evaluation per kept endpoint.
ExploreStats explore(const DriftModel& model, const TargetDensity& target,
                     ReplayBuffer& buffer, const TrainConfig& cfg, double gamma,
                     std::uint64_t round);

// Optimization phase: inner_loops Adam steps on the flow-sampling loss over
// the frozen buffer. Returns the mean loss (0 when inner_loops = 0).
double optimize(DriftModel& model, AdamState& adam, const ReplayBuffer& buffer,
                const TargetDensity& target, const TrainConfig& cfg, double gamma,
                std::uint64_t round);

struct RoundMetrics {
  int round = 0;
  double loss_mean = 0.0;
  double gamma = 0.0;
  std::size_t buffer_len = 0;
  std::int64_t score_calls_total = 0;
  double wallclock_s = 0.0;
  int dropped = 0;
};

struct TrainResult {
  DriftModel model;
  double gamma = 0.0;  // value the final model was trained with
  std::vector<RoundMetrics> metrics;
  std::int64_t score_calls = 0;
};

using RoundCallback =
    std::function<void(const RoundMetrics&, const DriftModel&, const SamplingContext&)>;

TrainResult train(const TargetDensity& target, const TrainConfig& cfg,
                  const RoundCallback& on_round = {});

// Number of worker threads for batch-parallel work: FS_THREADS if set,
// otherwise the hardware concurrency.
int worker_threads();

}  // namespace fsamp
