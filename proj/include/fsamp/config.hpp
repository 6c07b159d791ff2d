#pragma once

#include "fsamp/oracles.hpp"
#include "fsamp/sde.hpp"
#include "fsamp/targets.hpp"
#include "fsamp/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fsamp {

struct TargetConfig {
  TargetKind kind = TargetKind::kGmm;
  GmmParams gmm;
  Dw4Params dw4;
  LjParams lj;
  VmfMixtureParams vmf;
};

struct SampleConfig {
  int n = 10000;
  int nfe = 128;
};

struct EvalConfig {
  std::vector<std::string> metrics;  // empty: defaults for the target kind
  int n_reference = 10000;
  int w2_subset = 1024;
  int aligned_subset = 200;
  int hist_bins = 200;
  LangevinConfig langevin;  // reference sampler for particle targets; seed unused
};

struct RunConfig {
  std::string experiment = "run";
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: runs/<experiment>
  TargetConfig target;
  TrainConfig train;
  int checkpoint_every = 1;
  bool log_wallclock = false;
  SampleConfig sample;
  EvalConfig eval;
};

GmmParams default_gmm_params();
VmfMixtureParams default_vmf_params();

// `key = value` lines; '#' starts a comment. target.kind and seed are
// required, unknown keys are rejected. Errors are Error(kConfig) naming the
// line or the key.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// Complete key = value listing that parses back to the same configuration.
std::string render_config(const RunConfig& cfg);

TargetDensity make_target(const TargetConfig& cfg);
std::vector<std::string> default_metrics(TargetKind kind);
std::string resolved_out_dir(const RunConfig& cfg);

}  // namespace fsamp
