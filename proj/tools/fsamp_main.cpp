#include "fsamp/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"fsamp: diffusion samplers for unnormalized densities"};
  app.require_subcommand(1);

  fsamp::TrainArgs train;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "train a sampler from a run config");
  train_cmd->add_option("--config", train.config, "run config file")->required();
  auto* train_out = train_cmd->add_option("--out", "output directory (overrides out_dir)");
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "overrides the config seed");

  fsamp::SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "draw samples from a checkpoint");
  sample_cmd->add_option("--checkpoint", sample.checkpoint, "checkpoint file")->required();
  sample_cmd->add_option("--n", sample.n, "number of samples");
  sample_cmd->add_option("--nfe", sample.nfe, "solver steps per trajectory");
  sample_cmd->add_option("--seed", sample.seed, "random seed");
  sample_cmd->add_option("--out", sample.out, "output CSV")->required();

  fsamp::EvalArgs eval;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate samples against the target");
  eval_cmd->add_option("--samples", eval.samples, "samples CSV")->required();
  eval_cmd->add_option("--config", eval.config, "run config file")->required();
  auto* eval_ref = eval_cmd->add_option("--reference", "reference samples CSV (default: oracle draws)");
  auto* eval_out = eval_cmd->add_option("--out", "report CSV");
  auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "overrides the config seed");

  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run the oracle self-checks");
  verify_cmd->add_option("--seed", verify_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fsamp::kExitUsage;
  }

  if (*train_cmd) {
    if (*train_out) train.out = train_out->as<std::string>();
    if (*train_seed_opt) train.seed = train_seed;
    return fsamp::cmd_train(train, std::cout, std::cerr);
  }
  if (*sample_cmd) return fsamp::cmd_sample(sample, std::cout, std::cerr);
  if (*eval_cmd) {
    if (*eval_ref) eval.reference = eval_ref->as<std::string>();
    if (*eval_out) eval.out = eval_out->as<std::string>();
    if (*eval_seed_opt) eval.seed = eval_seed;
    return fsamp::cmd_eval(eval, std::cout, std::cerr);
  }
  if (*verify_cmd) return fsamp::cmd_verify(verify_seed, std::cout);
  return fsamp::kExitUsage;
}
