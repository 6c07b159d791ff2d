#pragma once

#include "fsamp/config.hpp"
#include "fsamp/csv.hpp"
#include "fsamp/error.hpp"
#include "fsamp/trainer.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fsamp {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCheckpoint = 3;

int exit_code_for(const Error& e);

struct TrainArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

struct SampleArgs {
  std::string checkpoint;
  int n = 10000;
  int nfe = 128;
  std::uint64_t seed = 0;
  std::string out;
};

struct EvalArgs {
  std::string samples;
  std::string config;
  std::optional<std::string> reference;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err);
int cmd_sample(const SampleArgs& args, std::ostream& log, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err);
int cmd_verify(std::uint64_t seed, std::ostream& log);

// Library entry points behind the commands.
TrainResult run_training(const RunConfig& cfg, const std::string& out_dir);
Mat sample_checkpoint(const Checkpoint& ck, int n, int nfe, std::uint64_t seed, int* dropped = nullptr);
Mat reference_samples(const RunConfig& cfg, const TargetDensity& target);
std::vector<EvalRow> evaluate(const RunConfig& cfg, const TargetDensity& target, const Mat& samples,
                              const Mat& reference, std::uint64_t seed);

}  // namespace fsamp
