#pragma once

#include "fsamp/net.hpp"

#include <cstdint>
#include <string>

namespace fsamp {

inline constexpr char kCheckpointMagic[4] = {'F', 'S', 'M', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// What a sampler needs besides the weights: where samples live and which
// noise scale the model was trained with.
struct SamplingContext {
  ManifoldKind manifold_kind = ManifoldKind::kEuclidean;
  double kappa = 0.0;
  double gamma = 1.0;
  int com_particles = 0;  // > 0 for zero-COM particle systems
  int com_spatial = 0;
};

struct Checkpoint {
  DriftModel model;
  SamplingContext context;
};

// Layout (all integers u32, all reals f64, little-endian):
//   "FSMP" | version | n_dims | dims[n_dims] | activation | time_features |
//   manifold_kind | kappa | gamma | com_particles | com_spatial |
//   n_params (u64) | params[n_params]
void save_checkpoint(const std::string& path, const DriftModel& model,
                     const SamplingContext& context);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fsamp
