#ifndef SLICESIM_EXPERIMENT_HPP_
#define SLICESIM_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicesim/checkpoint.hpp"
#include "slicesim/config.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/orchestrator.hpp"

namespace slicesim {

enum class Algorithm { kTd3, kDdpg, kPpo, kTd3Wic, kDdpgWic, kPpoWic, kRssiIp };

std::string to_string(Algorithm a);
/// Throws ConfigError("algorithm", ...) for unknown names.
Algorithm parse_algorithm(const std::string& name);
bool is_wic(Algorithm a);
bool is_learned(Algorithm a);
std::vector<Algorithm> all_algorithms();

/// Hyperparameter overrides, as JSON objects keyed like the agent configs.
struct AgentOverrides {
  nlohmann::json global = nlohmann::json::object();
  nlohmann::json slice = nlohmann::json::object();
};

void apply_overrides(drl::OffPolicyConfig& c, const nlohmann::json& j);
void apply_overrides(drl::PpoConfig& c, const nlohmann::json& j);

struct ExperimentSpec {
  ScenarioConfig scenario = default_config();
  Algorithm algorithm = Algorithm::kTd3;
  int episodes = 300;
  int eval_realizations = 50;
  std::vector<int> sweep_users;
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds{1};
  /// Training episodes during which the inter-slice agent acts every slot.
  int force_trigger_episodes = 200;
  /// Final training episodes in which only the slice agents learn.
  int staged_episodes = 0;
  /// Periodic checkpoint interval in episodes; 0 keeps only the final one.
  int checkpoint_every = 0;
  int workers = 1;
  AgentOverrides agents;
};

/// Scenario may be inline ("scenario": {...}) or a path ("config": "...")
/// resolved against `base_dir`. Unknown keys are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::string& path);
void validate(const ExperimentSpec& spec);

/// Per-slice populations for `total` users in the reference 20:70:210
/// proportions, by largest-remainder rounding.
std::vector<int> scale_user_counts(const std::vector<int>& reference, int total);

/// Learned controller for `algorithm`, with agents as wide as
/// `slice_dims` (defaults to the scenario's slice sizes).
std::unique_ptr<DrlController> make_drl_controller(Algorithm algorithm,
                                                   const ScenarioConfig& config,
                                                   std::uint64_t seed,
                                                   const AgentOverrides& overrides = {},
                                                   std::vector<int> slice_dims = {});

SlicingEnv make_env(Algorithm algorithm, const ScenarioConfig& config);

struct CurveRow {
  int episode = 0;
  std::string agent;
  double cumulative_reward = 0.0;
  std::int64_t transitions = 0;
  double mean_reward = 0.0;
};

struct TrainOptions {
  int episodes = 300;
  int force_trigger_episodes = 200;
  int staged_episodes = 0;
  AgentOverrides agents;
  /// Called after each episode.
  std::function<void(int, const EpisodeMetrics&, const DrlController&)> on_episode;
};

struct TrainResult {
  std::unique_ptr<DrlController> controller;
  std::vector<CurveRow> curve;
};

TrainResult train(Algorithm algorithm, const ScenarioConfig& config, std::uint64_t seed,
                  const TrainOptions& options);

/// Checkpoint of a trained controller with everything needed to rebuild it.
Checkpoint make_checkpoint(const DrlController& controller, Algorithm algorithm,
                           const ScenarioConfig& config, std::uint64_t seed, int episodes,
                           const AgentOverrides& overrides);
std::unique_ptr<DrlController> controller_from_checkpoint(const Checkpoint& ckpt);

/// One scalar of a realization: scope is "system" or a slice name.
struct MetricValue {
  std::string scope;
  std::string metric;
  double value = 0.0;
};

std::vector<MetricValue> realization_metrics(const EpisodeMetrics& em,
                                             const ScenarioConfig& config);

struct Realization {
  std::uint64_t seed = 0;
  int index = 0;
  EpisodeMetrics episode;
};

/// Runs `realizations` evaluation episodes per seed. Learned algorithms need
/// `ckpt`; workers > 1 spreads realizations over threads without changing
/// any result.
std::vector<Realization> evaluate(Algorithm algorithm, const ScenarioConfig& config,
                                  const Checkpoint* ckpt,
                                  const std::vector<std::uint64_t>& seeds, int realizations,
                                  int workers = 1);

struct SummaryRow {
  std::string scope;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  std::int64_t n = 0;
};

std::vector<SummaryRow> summarize(const std::vector<Realization>& rs,
                                  const ScenarioConfig& config);
/// Mean of `metric` in `scope`; throws std::out_of_range when absent.
double summary_value(const std::vector<SummaryRow>& rows, const std::string& scope,
                     const std::string& metric);

inline constexpr int kCsvSchemaVersion = 1;

/// Writes slots, slices, users, realizations and summary CSVs into `dir`.
void write_eval_outputs(const std::string& dir, Algorithm algorithm,
                        const ScenarioConfig& config, const std::vector<Realization>& rs);

int cmd_train(const ExperimentSpec& spec);
/// `checkpoint` may be empty for rssi-ip.
int cmd_eval(const ExperimentSpec& spec, const std::string& checkpoint);
int cmd_sweep(const ExperimentSpec& spec, const std::string& checkpoint);

/// Hash of the canonical JSON text (FNV-1a, 64 bit, hex).
std::string config_hash(const nlohmann::json& j);

}  // namespace slicesim

#endif  // SLICESIM_EXPERIMENT_HPP_
