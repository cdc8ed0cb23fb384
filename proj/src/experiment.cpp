#include "slicesim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <thread>

#include "slicesim/baselines.hpp"
#include "slicesim/csv.hpp"
#include "slicesim/random.hpp"

namespace slicesim {
namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<Algorithm, std::string>>& algorithm_names() {
  static const std::vector<std::pair<Algorithm, std::string>> names{
      {Algorithm::kTd3, "td3"},         {Algorithm::kDdpg, "ddpg"},
      {Algorithm::kPpo, "ppo"},         {Algorithm::kTd3Wic, "td3-wic"},
      {Algorithm::kDdpgWic, "ddpg-wic"}, {Algorithm::kPpoWic, "ppo-wic"},
      {Algorithm::kRssiIp, "rssi-ip"}};
  return names;
}

enum class Learner { kTd3, kDdpg, kPpo };

Learner learner_of(Algorithm a) {
  switch (a) {
    case Algorithm::kTd3:
    case Algorithm::kTd3Wic:
      return Learner::kTd3;
    case Algorithm::kDdpg:
    case Algorithm::kDdpgWic:
      return Learner::kDdpg;
    case Algorithm::kPpo:
    case Algorithm::kPpoWic:
      return Learner::kPpo;
    case Algorithm::kRssiIp:
      break;
  }
  throw ConfigError("algorithm", "rssi-ip has no learned agents");
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key, "wrong type");
  }
}

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(where + "." + key, "unknown key");
    }
  }
}

std::unique_ptr<drl::Agent> make_agent(Learner learner, drl::AgentRole role,
                                       const std::string& slice_name, int obs_dim,
                                       int action_dim, std::uint64_t seed,
                                       const nlohmann::json& overrides) {
  if (learner == Learner::kPpo) {
    auto cfg = drl::default_ppo_config(role);
    apply_overrides(cfg, overrides);
    return std::make_unique<drl::PpoAgent>(obs_dim, action_dim, cfg, seed);
  }
  auto cfg = drl::default_off_policy_config(role, slice_name, learner == Learner::kDdpg);
  apply_overrides(cfg, overrides);
  if (learner == Learner::kTd3) {
    return std::make_unique<drl::Td3Agent>(obs_dim, action_dim, cfg, seed);
  }
  return std::make_unique<drl::DdpgAgent>(obs_dim, action_dim, cfg, seed);
}

std::unique_ptr<Controller> make_eval_controller(Algorithm algorithm,
                                                 const ScenarioConfig& config,
                                                 const Checkpoint* ckpt) {
  if (!is_learned(algorithm)) {
    return std::make_unique<RssiIpController>(reference_contracted_users(config));
  }
  if (!ckpt) throw ConfigError("checkpoint", "required for " + to_string(algorithm));
  auto c = controller_from_checkpoint(*ckpt);
  if (c->num_slices() != config.num_slices()) {
    throw ConfigError("slices", "checkpoint was trained with " +
                                    std::to_string(c->num_slices()) + " slices");
  }
  return c;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_manifest(const std::string& dir, const std::string& command,
                    const ExperimentSpec& spec, const std::vector<std::string>& files,
                    const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json m;
  m["command"] = command;
  m["csv_schema_version"] = kCsvSchemaVersion;
  m["algorithm"] = to_string(spec.algorithm);
  const nlohmann::json spec_json = spec_to_json(spec);
  m["spec"] = spec_json;
  m["config_hash"] = config_hash(spec_json["scenario"]);
  m["spec_hash"] = config_hash(spec_json);
  m["seeds"] = spec.seeds;
  m["files"] = files;
  m["compiler"] = __VERSION__;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  auto out = open_out(dir + "/manifest.json");
  out << m.dump(2) << '\n';
}

std::vector<std::string> agent_names(const ScenarioConfig& config) {
  std::vector<std::string> names{"global"};
  for (const auto& s : config.slices) names.push_back(s.name);
  return names;
}

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& [alg, name] : algorithm_names()) {
    if (alg == a) return name;
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& [alg, n] : algorithm_names()) {
    if (n == name) return alg;
  }
  throw ConfigError("algorithm", "unknown algorithm '" + name +
                                     "' (td3, ddpg, ppo, td3-wic, ddpg-wic, ppo-wic, rssi-ip)");
}

bool is_wic(Algorithm a) {
  return a == Algorithm::kTd3Wic || a == Algorithm::kDdpgWic || a == Algorithm::kPpoWic;
}

bool is_learned(Algorithm a) { return a != Algorithm::kRssiIp; }

std::vector<Algorithm> all_algorithms() {
  std::vector<Algorithm> out;
  for (const auto& [alg, name] : algorithm_names()) out.push_back(alg);
  return out;
}

void apply_overrides(drl::OffPolicyConfig& c, const nlohmann::json& j) {
  if (j.is_null()) return;
  const std::string w = "agents";
  reject_unknown(j,
                 {"hidden", "actor_lr", "critic_lr", "gamma", "tau", "target_update_every",
                  "batch_size", "buffer_capacity", "warmup_steps", "updates_per_step",
                  "noise_sigma", "ou_theta", "final_layer_scale", "policy_delay",
                  "target_noise", "target_noise_clip"},
                 w);
  take(j, "hidden", c.hidden, w);
  take(j, "actor_lr", c.actor_lr, w);
  take(j, "critic_lr", c.critic_lr, w);
  take(j, "gamma", c.gamma, w);
  take(j, "tau", c.tau, w);
  take(j, "target_update_every", c.target_update_every, w);
  take(j, "batch_size", c.batch_size, w);
  take(j, "buffer_capacity", c.buffer_capacity, w);
  take(j, "warmup_steps", c.warmup_steps, w);
  take(j, "updates_per_step", c.updates_per_step, w);
  take(j, "noise_sigma", c.noise_sigma, w);
  take(j, "ou_theta", c.ou_theta, w);
  take(j, "final_layer_scale", c.final_layer_scale, w);
  take(j, "policy_delay", c.policy_delay, w);
  take(j, "target_noise", c.target_noise, w);
  take(j, "target_noise_clip", c.target_noise_clip, w);
}

void apply_overrides(drl::PpoConfig& c, const nlohmann::json& j) {
  if (j.is_null()) return;
  const std::string w = "agents";
  reject_unknown(j,
                 {"hidden", "actor_lr", "critic_lr", "gamma", "gae_lambda", "clip", "epochs",
                  "rollout", "minibatch", "value_coef", "init_log_std", "final_layer_scale",
                  "normalize_advantages"},
                 w);
  take(j, "hidden", c.hidden, w);
  take(j, "actor_lr", c.actor_lr, w);
  take(j, "critic_lr", c.critic_lr, w);
  take(j, "gamma", c.gamma, w);
  take(j, "gae_lambda", c.gae_lambda, w);
  take(j, "clip", c.clip, w);
  take(j, "epochs", c.epochs, w);
  take(j, "rollout", c.rollout, w);
  take(j, "minibatch", c.minibatch, w);
  take(j, "value_coef", c.value_coef, w);
  take(j, "init_log_std", c.init_log_std, w);
  take(j, "final_layer_scale", c.final_layer_scale, w);
  take(j, "normalize_advantages", c.normalize_advantages, w);
}

ExperimentSpec spec_from_json(const nlohmann::json& j, const std::string& base_dir) {
  reject_unknown(j,
                 {"config", "scenario", "algorithm", "episodes", "eval_realizations",
                  "sweep_users", "output_dir", "seeds", "force_trigger_episodes",
                  "staged_episodes", "checkpoint_every", "workers", "agents"},
                 "spec");
  ExperimentSpec s;
  if (j.contains("config") && j.contains("scenario")) {
    throw ConfigError("spec.config", "give either config or scenario, not both");
  }
  if (j.contains("config")) {
    fs::path p = j.at("config").get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    s.scenario = load_config(p.string());
  } else if (j.contains("scenario")) {
    s.scenario = config_from_json(j.at("scenario"));
  }
  std::string alg = to_string(s.algorithm);
  take(j, "algorithm", alg, "spec");
  s.algorithm = parse_algorithm(alg);
  take(j, "episodes", s.episodes, "spec");
  take(j, "eval_realizations", s.eval_realizations, "spec");
  take(j, "sweep_users", s.sweep_users, "spec");
  take(j, "output_dir", s.output_dir, "spec");
  take(j, "seeds", s.seeds, "spec");
  take(j, "force_trigger_episodes", s.force_trigger_episodes, "spec");
  take(j, "staged_episodes", s.staged_episodes, "spec");
  take(j, "checkpoint_every", s.checkpoint_every, "spec");
  take(j, "workers", s.workers, "spec");
  if (j.contains("agents")) {
    const auto& a = j.at("agents");
    reject_unknown(a, {"global", "slice"}, "spec.agents");
    if (a.contains("global")) s.agents.global = a.at("global");
    if (a.contains("slice")) s.agents.slice = a.at("slice");
  }
  validate(s);
  return s;
}

nlohmann::json spec_to_json(const ExperimentSpec& s) {
  return {{"scenario", config_to_json(s.scenario)},
          {"algorithm", to_string(s.algorithm)},
          {"episodes", s.episodes},
          {"eval_realizations", s.eval_realizations},
          {"sweep_users", s.sweep_users},
          {"output_dir", s.output_dir},
          {"seeds", s.seeds},
          {"force_trigger_episodes", s.force_trigger_episodes},
          {"staged_episodes", s.staged_episodes},
          {"checkpoint_every", s.checkpoint_every},
          {"workers", s.workers},
          {"agents", {{"global", s.agents.global}, {"slice", s.agents.slice}}}};
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("spec", "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("spec", std::string("invalid JSON: ") + e.what());
  }
  return spec_from_json(j, fs::path(path).parent_path().string());
}

void validate(const ExperimentSpec& s) {
  validate(s.scenario);
  if (s.episodes < 0) throw ConfigError("episodes", "must be >= 0");
  if (s.eval_realizations < 1) throw ConfigError("eval_realizations", "must be >= 1");
  if (s.seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  if (s.workers < 1) throw ConfigError("workers", "must be >= 1");
  if (s.checkpoint_every < 0) throw ConfigError("checkpoint_every", "must be >= 0");
  if (s.force_trigger_episodes < 0) throw ConfigError("force_trigger_episodes", "must be >= 0");
  if (s.staged_episodes < 0 || s.staged_episodes > s.episodes) {
    throw ConfigError("staged_episodes", "must lie in [0, episodes]");
  }
  for (int n : s.sweep_users) {
    if (n < s.scenario.num_slices()) {
      throw ConfigError("sweep_users", "each point needs at least one user per slice");
    }
  }
  if (is_learned(s.algorithm)) {
    const Learner l = learner_of(s.algorithm);
    if (l == Learner::kPpo) {
      drl::PpoConfig c;
      apply_overrides(c, s.agents.global);
      apply_overrides(c, s.agents.slice);
    } else {
      drl::OffPolicyConfig c;
      apply_overrides(c, s.agents.global);
      apply_overrides(c, s.agents.slice);
    }
  }
}

std::vector<int> scale_user_counts(const std::vector<int>& reference, int total) {
  const double sum = std::accumulate(reference.begin(), reference.end(), 0.0);
  if (reference.empty() || sum <= 0) throw ConfigError("sweep_users", "empty reference");
  if (total < 0) throw ConfigError("sweep_users", "negative user count");
  std::vector<int> out(reference.size());
  std::vector<std::pair<double, std::size_t>> rem;
  int assigned = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double quota = double(total) * reference[i] / sum;
    out[i] = int(std::floor(quota));
    assigned += out[i];
    rem.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[rem[k].second];
  return out;
}

std::unique_ptr<DrlController> make_drl_controller(Algorithm algorithm,
                                                   const ScenarioConfig& config,
                                                   std::uint64_t seed,
                                                   const AgentOverrides& overrides,
                                                   std::vector<int> slice_dims) {
  const Learner learner = learner_of(algorithm);
  const int n = config.num_slices();
  if (slice_dims.empty()) {
    for (const auto& s : config.slices) slice_dims.push_back(s.num_users);
  }
  if (int(slice_dims.size()) != n) throw ConfigError("slices", "slice_dims size");
  auto global = make_agent(learner, drl::AgentRole::kGlobal, "", 4 * n, n,
                           derive_seed(seed, std::uint64_t(Stream::kAgents), 0),
                           overrides.global);
  std::vector<std::unique_ptr<drl::Agent>> slices;
  for (int s = 0; s < n; ++s) {
    const int d = slice_dims[std::size_t(s)];
    slices.push_back(make_agent(learner, drl::AgentRole::kSlice,
                                config.slices[std::size_t(s)].name, d, d,
                                derive_seed(seed, std::uint64_t(Stream::kAgents),
                                            std::uint64_t(s) + 1),
                                overrides.slice));
  }
  return std::make_unique<DrlController>(std::move(global), std::move(slices));
}

SlicingEnv make_env(Algorithm algorithm, const ScenarioConfig& config) {
  if (is_wic(algorithm) || algorithm == Algorithm::kRssiIp) return make_wic_env(config);
  return SlicingEnv(config, ValidityRules::full());
}

TrainResult train(Algorithm algorithm, const ScenarioConfig& config, std::uint64_t seed,
                  const TrainOptions& options) {
  TrainResult r;
  r.controller = make_drl_controller(algorithm, config, seed, options.agents);
  r.controller->set_update_normalizers(true);
  SlicingEnv env = make_env(algorithm, config);
  const auto names = agent_names(config);
  for (int ep = 0; ep < options.episodes; ++ep) {
    EpisodeOptions eo;
    eo.mode = RunMode::kTrain;
    eo.force_trigger = ep < options.force_trigger_episodes;
    r.controller->set_global_learning(ep < options.episodes - options.staged_episodes);
    eo.keep_user_metrics = false;
    const EpisodeMetrics em = run_episode(
        env, *r.controller, derive_seed(seed, std::uint64_t(Stream::kTraining), std::uint64_t(ep)),
        eo);
    for (std::size_t a = 0; a < names.size(); ++a) {
      const auto n = em.transitions[a];
      r.curve.push_back({ep, names[a], em.cumulative_reward[a], n,
                         n > 0 ? em.cumulative_reward[a] / double(n) : 0.0});
    }
    if (options.on_episode) options.on_episode(ep, em, *r.controller);
  }
  r.controller->set_update_normalizers(false);
  r.controller->set_global_learning(true);
  return r;
}

Checkpoint make_checkpoint(const DrlController& controller, Algorithm algorithm,
                           const ScenarioConfig& config, std::uint64_t seed, int episodes,
                           const AgentOverrides& overrides) {
  Checkpoint c;
  auto& ctrl = const_cast<DrlController&>(controller);
  std::vector<int> dims;
  for (int s = 0; s < ctrl.num_slices(); ++s) dims.push_back(ctrl.slice_agent(s).obs_dim());
  c.meta = {{"algorithm", to_string(algorithm)},
            {"scenario", config_to_json(config)},
            {"seed", seed},
            {"episodes", episodes},
            {"slice_dims", dims},
            {"agents", {{"global", overrides.global}, {"slice", overrides.slice}}}};
  controller.save(c);
  return c;
}

std::unique_ptr<DrlController> controller_from_checkpoint(const Checkpoint& ckpt) {
  try {
    const auto& m = ckpt.meta;
    const Algorithm alg = parse_algorithm(m.at("algorithm").get<std::string>());
    const ScenarioConfig cfg = config_from_json(m.at("scenario"));
    AgentOverrides ov;
    ov.global = m.at("agents").at("global");
    ov.slice = m.at("agents").at("slice");
    auto c = make_drl_controller(alg, cfg, m.at("seed").get<std::uint64_t>(), ov,
                                 m.at("slice_dims").get<std::vector<int>>());
    c->load(ckpt);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint metadata: ") + e.what());
  }
}

std::vector<MetricValue> realization_metrics(const EpisodeMetrics& em,
                                             const ScenarioConfig& config) {
  const int n = config.num_slices();
  const double slots = double(em.slots.size());
  double obj = 0, sat = 0, cost = 0, wst = 0, trig = 0, ginv = 0, sinv = 0, unsat = 0;
  const auto per_slice = static_cast<std::size_t>(n);
  std::vector<double> s_sat(per_slice), s_cost(per_slice), s_frac(per_slice), s_rate(per_slice),
      s_wst(per_slice), s_inv(per_slice), s_need(per_slice), s_spare(per_slice),
      s_unsat(per_slice);
  const SliceLayout layout(config);
  for (const auto& m : em.slots) {
    obj += m.objective;
    sat += m.system_satisfaction;
    cost += m.total_cost;
    wst += m.user_wastage.size() ? m.user_wastage.mean() : 0.0;
    if (m.triggered) {
      trig += 1;
      if (!m.global_valid) ginv += 1;
    }
    for (int s = 0; s < n; ++s) {
      const auto us = std::size_t(s);
      s_sat[us] += m.slice_satisfaction[s];
      s_cost[us] += m.slice_cost[s];
      s_frac[us] += m.slice_fraction[s];
      if (m.user_rate_bps.size()) {
        s_rate[us] += m.user_rate_bps.segment(layout.begin(s), layout.size(s)).mean();
        s_wst[us] += m.user_wastage.segment(layout.begin(s), layout.size(s)).mean();
        // A user is unsatisfied when its rate does not exceed the requirement.
        const double req = config.slices[us].rate_requirement_bps;
        const auto rates = m.user_rate_bps.segment(layout.begin(s), layout.size(s));
        const double miss = double((rates.array() <= req).count());
        s_unsat[us] += miss / double(layout.size(s));
        unsat += miss / double(m.user_rate_bps.size());
      }
      if (!m.slice_valid[us]) {
        s_inv[us] += 1;
        sinv += 1;
      }
      s_need[us] += m.flags[us].needs_resources;
      s_spare[us] += m.flags[us].has_spare;
    }
  }
  std::vector<MetricValue> out{
      {"system", "objective", obj / slots},
      {"system", "satisfaction", sat / slots},
      {"system", "total_cost", cost / slots},
      {"system", "wastage", wst / slots},
      {"system", "triggered", trig / slots},
      {"system", "global_invalid", trig > 0 ? ginv / trig : 0.0},
      {"system", "slice_invalid", sinv / (slots * n)},
      {"system", "unsatisfied", unsat / slots},
  };
  for (int s = 0; s < n; ++s) {
    const auto us = std::size_t(s);
    const std::string& name = config.slices[us].name;
    out.push_back({name, "satisfaction", s_sat[us] / slots});
    out.push_back({name, "cost", s_cost[us] / slots});
    out.push_back({name, "fraction", s_frac[us] / slots});
    out.push_back({name, "rate_bps", s_rate[us] / slots});
    out.push_back({name, "wastage", s_wst[us] / slots});
    out.push_back({name, "invalid", s_inv[us] / slots});
    out.push_back({name, "needs_resources", s_need[us] / slots});
    out.push_back({name, "has_spare", s_spare[us] / slots});
    out.push_back({name, "unsatisfied", s_unsat[us] / slots});
  }
  return out;
}

std::vector<Realization> evaluate(Algorithm algorithm, const ScenarioConfig& config,
                                  const Checkpoint* ckpt,
                                  const std::vector<std::uint64_t>& seeds, int realizations,
                                  int workers) {
  std::vector<Realization> out;
  for (auto seed : seeds) {
    for (int i = 0; i < realizations; ++i) out.push_back({seed, i, {}});
  }
  // Building one controller up front surfaces checkpoint errors on the
  // calling thread.
  auto first = make_eval_controller(algorithm, config, ckpt);
  const int nw = std::max(1, std::min<int>(workers, int(out.size())));
  auto run = [&](int w, Controller& ctrl) {
    SlicingEnv env = make_env(algorithm, config);
    for (std::size_t k = std::size_t(w); k < out.size(); k += std::size_t(nw)) {
      EpisodeOptions eo;
      eo.mode = RunMode::kEval;
      out[k].episode = run_episode(
          env, ctrl,
          derive_seed(out[k].seed, std::uint64_t(Stream::kEvaluation), std::uint64_t(out[k].index)),
          eo);
    }
  };
  if (nw == 1) {
    run(0, *first);
    return out;
  }
  std::vector<std::unique_ptr<Controller>> ctrls;
  ctrls.push_back(std::move(first));
  for (int w = 1; w < nw; ++w) ctrls.push_back(make_eval_controller(algorithm, config, ckpt));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nw));
  std::vector<std::thread> threads;
  for (int w = 0; w < nw; ++w) {
    threads.emplace_back([&, w] {
      try {
        run(w, *ctrls[std::size_t(w)]);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<Realization>& rs,
                                  const ScenarioConfig& config) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> values;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : rs) {
    for (const auto& mv : realization_metrics(r.episode, config)) {
      auto [it, fresh] = index.emplace(std::pair{mv.scope, mv.metric}, rows.size());
      if (fresh) {
        rows.push_back({mv.scope, mv.metric, 0.0, 0.0, 0});
        values.emplace_back();
      }
      values[it->second].push_back(mv.value);
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& v = values[i];
    rows[i].n = std::int64_t(v.size());
    rows[i].mean = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - rows[i].mean) * (x - rows[i].mean);
    rows[i].stddev = v.size() > 1 ? std::sqrt(ss / double(v.size() - 1)) : 0.0;
  }
  return rows;
}

double summary_value(const std::vector<SummaryRow>& rows, const std::string& scope,
                     const std::string& metric) {
  for (const auto& r : rows) {
    if (r.scope == scope && r.metric == metric) return r.mean;
  }
  throw std::out_of_range("summary has no " + scope + "/" + metric);
}

namespace {

const std::vector<std::string> kSummaryHeader{"algorithm", "total_users", "scope", "metric",
                                              "mean",      "std",         "n"};

void write_summary_rows(CsvWriter& w, const std::string& alg, int users,
                        const std::vector<SummaryRow>& rows) {
  for (const auto& r : rows) {
    w.field(alg).field(users).field(r.scope).field(r.metric).field(r.mean).field(r.stddev).field(
        r.n);
    w.end_row();
  }
}

}  // namespace

void write_eval_outputs(const std::string& dir, Algorithm algorithm,
                        const ScenarioConfig& config, const std::vector<Realization>& rs) {
  ensure_dir(dir);
  const std::string alg = to_string(algorithm);
  const SliceLayout layout(config);
  const int users = config.num_users();
  const int n = config.num_slices();
  {
    auto f = open_out(dir + "/slots.csv");
    CsvWriter w(f, {"algorithm", "seed", "realization", "slot", "triggered", "global_valid",
                    "system_satisfaction", "total_cost", "objective", "cost_in_objective",
                    "global_reward", "wastage"});
    for (const auto& r : rs) {
      for (const auto& m : r.episode.slots) {
        w.field(alg).field(r.seed).field(r.index).field(m.slot).field(m.triggered)
            .field(m.global_valid).field(m.system_satisfaction).field(m.total_cost)
            .field(m.objective).field(m.cost_in_objective).field(m.global_reward)
            .field(m.user_wastage.size() ? m.user_wastage.mean() : 0.0);
        w.end_row();
      }
    }
  }
  {
    auto f = open_out(dir + "/slices.csv");
    CsvWriter w(f, {"algorithm", "seed", "realization", "slot", "slice", "fraction",
                    "satisfaction", "cost", "needs_resources", "has_spare", "increased",
                    "decreased", "valid", "reward"});
    for (const auto& r : rs) {
      for (const auto& m : r.episode.slots) {
        for (int s = 0; s < n; ++s) {
          const auto us = std::size_t(s);
          w.field(alg).field(r.seed).field(r.index).field(m.slot).field(config.slices[us].name)
              .field(m.slice_fraction[s]).field(m.slice_satisfaction[s]).field(m.slice_cost[s])
              .field(m.flags[us].needs_resources).field(m.flags[us].has_spare)
              .field(m.flags[us].increased).field(m.flags[us].decreased)
              .field(bool(m.slice_valid[us])).field(m.slice_reward[s]);
          w.end_row();
        }
      }
    }
  }
  {
    auto f = open_out(dir + "/users.csv");
    CsvWriter w(f, {"algorithm", "seed", "realization", "slice", "user", "rate_bps",
                    "satisfaction", "fraction", "wastage"});
    for (const auto& r : rs) {
      const double slots = double(r.episode.slots.size());
      Eigen::VectorXd rate = Eigen::VectorXd::Zero(users), sat = rate, frac = rate, wst = rate;
      for (const auto& m : r.episode.slots) {
        rate += m.user_rate_bps;
        sat += m.user_satisfaction;
        frac += m.user_fraction;
        wst += m.user_wastage;
      }
      for (int u = 0; u < users; ++u) {
        const int s = layout.slice_of(u);
        w.field(alg).field(r.seed).field(r.index).field(config.slices[std::size_t(s)].name)
            .field(u - layout.begin(s)).field(rate[u] / slots).field(sat[u] / slots)
            .field(frac[u] / slots).field(wst[u] / slots);
        w.end_row();
      }
    }
  }
  {
    auto f = open_out(dir + "/realizations.csv");
    CsvWriter w(f, {"algorithm", "total_users", "seed", "realization", "scope", "metric",
                    "value"});
    for (const auto& r : rs) {
      for (const auto& mv : realization_metrics(r.episode, config)) {
        w.field(alg).field(users).field(r.seed).field(r.index).field(mv.scope).field(mv.metric)
            .field(mv.value);
        w.end_row();
      }
    }
  }
  {
    auto f = open_out(dir + "/summary.csv");
    CsvWriter w(f, kSummaryHeader);
    write_summary_rows(w, alg, users, summarize(rs, config));
  }
}

int cmd_train(const ExperimentSpec& spec) {
  validate(spec);
  if (!is_learned(spec.algorithm)) {
    throw ConfigError("algorithm", "rssi-ip is not trained; use eval");
  }
  ensure_dir(spec.output_dir + "/checkpoints");
  const std::string alg = to_string(spec.algorithm);
  auto f = open_out(spec.output_dir + "/curve.csv");
  CsvWriter w(f, {"algorithm", "seed", "episode", "agent", "cumulative_reward", "transitions",
                  "mean_reward"});
  std::vector<std::string> files{"curve.csv"};
  for (auto seed : spec.seeds) {
    TrainOptions opt;
    opt.episodes = spec.episodes;
    opt.force_trigger_episodes = spec.force_trigger_episodes;
    opt.staged_episodes = spec.staged_episodes;
    opt.agents = spec.agents;
    opt.on_episode = [&](int ep, const EpisodeMetrics& em, const DrlController& ctrl) {
      if ((ep + 1) % 10 == 0 || ep + 1 == spec.episodes) {
        std::cerr << alg << " seed " << seed << " episode " << ep + 1 << "/" << spec.episodes
                  << " global reward " << em.cumulative_reward[0] << '\n';
      }
      if (spec.checkpoint_every > 0 && (ep + 1) % spec.checkpoint_every == 0 &&
          ep + 1 < spec.episodes) {
        const std::string name = "checkpoints/" + alg + "-seed" + std::to_string(seed) +
                                 "-ep" + std::to_string(ep + 1) + ".ckpt";
        make_checkpoint(ctrl, spec.algorithm, spec.scenario, seed, ep + 1, spec.agents)
            .save(spec.output_dir + "/" + name);
        files.push_back(name);
      }
    };
    TrainResult r = train(spec.algorithm, spec.scenario, seed, opt);
    for (const auto& row : r.curve) {
      w.field(alg).field(seed).field(row.episode).field(row.agent).field(row.cumulative_reward)
          .field(row.transitions).field(row.mean_reward);
      w.end_row();
    }
    const std::string name = "checkpoints/" + alg + "-seed" + std::to_string(seed) + ".ckpt";
    make_checkpoint(*r.controller, spec.algorithm, spec.scenario, seed, spec.episodes,
                    spec.agents)
        .save(spec.output_dir + "/" + name);
    files.push_back(name);
  }
  f.close();
  write_manifest(spec.output_dir, "train", spec, files);
  return 0;
}

int cmd_eval(const ExperimentSpec& spec, const std::string& checkpoint) {
  validate(spec);
  std::optional<Checkpoint> ckpt;
  if (is_learned(spec.algorithm)) {
    if (checkpoint.empty()) throw ConfigError("checkpoint", "required for " + to_string(spec.algorithm));
    ckpt = Checkpoint::load(checkpoint);
    const std::string trained = ckpt->meta.value("algorithm", "");
    if (trained != to_string(spec.algorithm)) {
      throw ConfigError("algorithm", "checkpoint holds " + trained + ", spec asks for " +
                                         to_string(spec.algorithm));
    }
  }
  const auto rs = evaluate(spec.algorithm, spec.scenario, ckpt ? &*ckpt : nullptr, spec.seeds,
                           spec.eval_realizations, spec.workers);
  write_eval_outputs(spec.output_dir, spec.algorithm, spec.scenario, rs);
  write_manifest(spec.output_dir, "eval", spec,
                 {"slots.csv", "slices.csv", "users.csv", "realizations.csv", "summary.csv"},
                 {{"checkpoint", checkpoint}});
  return 0;
}

int cmd_sweep(const ExperimentSpec& spec, const std::string& checkpoint) {
  validate(spec);
  if (spec.sweep_users.empty()) throw ConfigError("sweep_users", "empty sweep");
  std::optional<Checkpoint> ckpt;
  if (is_learned(spec.algorithm)) {
    if (checkpoint.empty()) throw ConfigError("checkpoint", "required for " + to_string(spec.algorithm));
    ckpt = Checkpoint::load(checkpoint);
  }
  ensure_dir(spec.output_dir);
  const std::string alg = to_string(spec.algorithm);
  const auto reference = reference_contracted_users(spec.scenario);
  auto f = open_out(spec.output_dir + "/sweep.csv");
  CsvWriter w(f, kSummaryHeader);
  std::vector<std::string> files{"sweep.csv"};
  for (int total : spec.sweep_users) {
    const ScenarioConfig cfg =
        with_user_counts(spec.scenario, scale_user_counts(reference, total));
    validate(cfg);
    const auto rs = evaluate(spec.algorithm, cfg, ckpt ? &*ckpt : nullptr, spec.seeds,
                             spec.eval_realizations, spec.workers);
    const std::string sub = "users_" + std::to_string(total);
    write_eval_outputs(spec.output_dir + "/" + sub, spec.algorithm, cfg, rs);
    write_summary_rows(w, alg, total, summarize(rs, cfg));
    files.push_back(sub + "/summary.csv");
    std::cerr << alg << " sweep point " << total << " users done\n";
  }
  f.close();
  write_manifest(spec.output_dir, "sweep", spec, files, {{"checkpoint", checkpoint}});
  return 0;
}

std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace slicesim
