// Command-line front end: train, eval, sweep, inspect-checkpoint.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicesim/checkpoint.hpp"
#include "slicesim/config.hpp"
#include "slicesim/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonFlags {
  std::string spec_path;
  std::string config_path;
  std::string algorithm;
  std::vector<std::uint64_t> seeds;
  std::optional<int> episodes;
  std::optional<int> realizations;
  std::optional<int> workers;
  std::optional<int> force_trigger;
  std::optional<int> staged;
  std::optional<int> checkpoint_every;
  std::vector<int> users;
  std::string output;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--spec", f.spec_path, "Experiment spec (JSON)");
  cmd->add_option("--config", f.config_path, "Scenario config (JSON), replaces the spec's");
  cmd->add_option("-a,--algorithm", f.algorithm,
                  "td3, ddpg, ppo, td3-wic, ddpg-wic, ppo-wic or rssi-ip");
  cmd->add_option("--seeds", f.seeds, "Seed list");
  cmd->add_option("-o,--output", f.output, "Output directory");
  cmd->add_option("--workers", f.workers, "Parallel evaluation workers");
}

slicesim::ExperimentSpec build_spec(const CommonFlags& f) {
  slicesim::ExperimentSpec s =
      f.spec_path.empty() ? slicesim::ExperimentSpec{} : slicesim::load_spec(f.spec_path);
  if (!f.config_path.empty()) s.scenario = slicesim::load_config(f.config_path);
  if (!f.algorithm.empty()) s.algorithm = slicesim::parse_algorithm(f.algorithm);
  if (!f.seeds.empty()) s.seeds = f.seeds;
  if (f.episodes) s.episodes = *f.episodes;
  if (f.realizations) s.eval_realizations = *f.realizations;
  if (f.workers) s.workers = *f.workers;
  if (f.force_trigger) s.force_trigger_episodes = *f.force_trigger;
  if (f.staged) s.staged_episodes = *f.staged;
  if (f.checkpoint_every) s.checkpoint_every = *f.checkpoint_every;
  if (!f.users.empty()) s.sweep_users = f.users;
  if (!f.output.empty()) s.output_dir = f.output;
  slicesim::validate(s);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level RAN slicing simulator"};
  app.require_subcommand(1);

  CommonFlags train_f, eval_f, sweep_f;
  auto* train = app.add_subcommand("train", "Train agents and write curve.csv + checkpoints");
  add_common(train, train_f);
  train->add_option("--episodes", train_f.episodes, "Training episodes");
  train->add_option("--force-trigger-episodes", train_f.force_trigger,
                    "Episodes with the inter-slice agent acting every slot");
  train->add_option("--staged-episodes", train_f.staged,
                    "Final episodes that train only the slice agents");
  train->add_option("--checkpoint-every", train_f.checkpoint_every,
                    "Periodic checkpoint interval (episodes)");

  auto* eval = app.add_subcommand("eval", "Evaluate over independent realizations");
  add_common(eval, eval_f);
  eval->add_option("--realizations", eval_f.realizations, "Evaluation realizations per seed");
  eval->add_option("--checkpoint", eval_f.checkpoint, "Trained checkpoint");

  auto* sweep = app.add_subcommand("sweep", "Evaluate over a list of total user counts");
  add_common(sweep, sweep_f);
  sweep->add_option("--realizations", sweep_f.realizations, "Evaluation realizations per seed");
  sweep->add_option("--checkpoint", sweep_f.checkpoint, "Trained checkpoint");
  sweep->add_option("--users", sweep_f.users, "Total user counts");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect-checkpoint", "Print a checkpoint manifest");
  inspect->add_option("path", inspect_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*train) return slicesim::cmd_train(build_spec(train_f));
    if (*eval) return slicesim::cmd_eval(build_spec(eval_f), eval_f.checkpoint);
    if (*sweep) return slicesim::cmd_sweep(build_spec(sweep_f), sweep_f.checkpoint);
    if (*inspect) {
      std::cout << slicesim::Checkpoint::read_manifest(inspect_path).dump(2) << '\n';
      return 0;
    }
  } catch (const slicesim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
