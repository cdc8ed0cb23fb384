#include "slicesim/orchestrator.hpp"

#include <cmath>

#include "slicesim/qos.hpp"

namespace slicesim {

void SharedDb::publish(int slice, std::int64_t slot, const SliceRecord& r) {
  if (slice < 0 || slice >= num_slices_) throw OrchestrationError("publish: bad slice index");
  if (!records_.emplace(std::pair{slot, slice}, r).second) {
    throw OrchestrationError("slice " + std::to_string(slice) + " already published slot " +
                             std::to_string(slot));
  }
}

void SharedDb::publish_initial() {
  for (int s = 0; s < num_slices_; ++s) publish(s, -1, {0.0, true, false});
}

const SliceRecord& SharedDb::at(int slice, std::int64_t slot) const {
  auto it = records_.find({slot, slice});
  if (it == records_.end()) {
    throw OrchestrationError("no record for slice " + std::to_string(slice) + " at slot " +
                             std::to_string(slot));
  }
  return it->second;
}

bool SharedDb::complete(std::int64_t slot) const {
  for (int s = 0; s < num_slices_; ++s) {
    if (!records_.count({slot, s})) return false;
  }
  return true;
}

bool SharedDb::trigger(std::int64_t slot) const {
  bool any = false;
  for (int s = 0; s < num_slices_; ++s) any = at(s, slot).needs_resources || any;
  return any;
}

nlohmann::json SharedDb::export_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, r] : records_) {
    rows.push_back({{"slot", key.first},
                    {"slice", key.second},
                    {"satisfaction", r.satisfaction},
                    {"needs_resources", r.needs_resources},
                    {"has_spare", r.has_spare}});
  }
  return {{"num_slices", num_slices_}, {"records", rows}};
}

DrlController::DrlController(std::unique_ptr<drl::Agent> global,
                             std::vector<std::unique_ptr<drl::Agent>> slices)
    : global_(std::move(global)),
      slices_(std::move(slices)),
      normalizers_(slices_.size()),
      pending_slices_(slices_.size()) {
  if (!global_) throw std::invalid_argument("DrlController: no global agent");
  if (global_->obs_dim() != 4 * int(slices_.size()) ||
      global_->action_dim() != int(slices_.size())) {
    throw std::invalid_argument("DrlController: global agent dimensions do not match slices");
  }
  for (const auto& a : slices_) {
    if (!a) throw std::invalid_argument("DrlController: missing slice agent");
    if (a->obs_dim() != a->action_dim()) {
      throw std::invalid_argument("DrlController: slice agent must act per observed user");
    }
  }
}

Eigen::VectorXf DrlController::encode_global(const SlicingEnv& env) const {
  return env.global_observation().flatten().cast<float>();
}

Eigen::VectorXf DrlController::encode_slice(const SlicingEnv& env, int s) const {
  const auto& gains = env.slice_observation(s).gains;
  const int dim = slices_[std::size_t(s)]->obs_dim();
  if (gains.size() > dim) {
    throw std::invalid_argument("slice " + std::to_string(s) + " has " +
                                std::to_string(gains.size()) +
                                " users, its agent was built for " + std::to_string(dim));
  }
  Eigen::VectorXf obs = Eigen::VectorXf::Zero(dim);
  obs.head(gains.size()) = normalizers_[std::size_t(s)].encode(gains);
  return obs;
}

Eigen::VectorXd DrlController::global_action(const SlicingEnv& env, bool explore) {
  Pending& p = pending_global_;
  p.observation = encode_global(env);
  const auto a = global_->select_action(p.observation, explore && global_learning_);
  p.raw = a.raw;
  p.log_prob = a.log_prob;
  p.active = true;
  return env.global_action_space().to_fractions(a.action);
}

Eigen::VectorXd DrlController::slice_action(const SlicingEnv& env, int s, bool explore) {
  if (update_normalizers_) normalizers_[std::size_t(s)].update(env.slice_observation(s).gains);
  Pending& p = pending_slices_[std::size_t(s)];
  p.observation = encode_slice(env, s);
  const auto a = slices_[std::size_t(s)]->select_action(p.observation, explore);
  p.raw = a.raw;
  p.log_prob = a.log_prob;
  p.active = true;
  const auto space = env.slice_action_space(s);
  return space.to_fractions(a.action.head(space.dim));
}

void DrlController::end_slot(const SlicingEnv& env, const SlotOutcome& outcome, bool learn) {
  if (learn && global_learning_ && pending_global_.active) {
    global_->observe({pending_global_.observation, pending_global_.raw,
                      float(outcome.global_reward), encode_global(env), outcome.global_valid,
                      outcome.done, pending_global_.log_prob});
  }
  pending_global_.active = false;
  for (int s = 0; s < num_slices(); ++s) {
    Pending& p = pending_slices_[std::size_t(s)];
    if (learn && p.active) {
      slices_[std::size_t(s)]->observe({p.observation, p.raw,
                                        float(outcome.slice_rewards[s]), encode_slice(env, s),
                                        bool(outcome.slice_valid[std::size_t(s)]),
                                        outcome.done, p.log_prob});
    }
    p.active = false;
  }
}

void DrlController::end_episode() {
  global_->end_episode();
  for (auto& a : slices_) a->end_episode();
}

void DrlController::save(Checkpoint& c) const {
  global_->save(c, "global.");
  for (int s = 0; s < num_slices(); ++s) {
    const std::string prefix = "slice" + std::to_string(s) + ".";
    slices_[std::size_t(s)]->save(c, prefix);
    const auto& n = normalizers_[std::size_t(s)];
    Eigen::VectorXd v(3);
    v << double(n.count()), n.mean(), n.m2();
    c.put(prefix + "gain_normalizer", v);
  }
}

void DrlController::load(const Checkpoint& c) {
  global_->load(c, "global.");
  for (int s = 0; s < num_slices(); ++s) {
    const std::string prefix = "slice" + std::to_string(s) + ".";
    slices_[std::size_t(s)]->load(c, prefix);
    const Eigen::VectorXd v = c.get_f64(prefix + "gain_normalizer", 3);
    normalizers_[std::size_t(s)].set_state(std::int64_t(v[0]), v[1], v[2]);
  }
}

Eigen::VectorXd RssiIpController::global_action(const SlicingEnv& env, bool) {
  current_ = rssi_ip_allocate(env.state(), contracted_);
  return current_->inter;
}

Eigen::VectorXd RssiIpController::slice_action(const SlicingEnv& env, int s, bool) {
  if (!current_) current_ = rssi_ip_allocate(env.state(), contracted_);
  const auto& layout = env.state().layout;
  return current_->intra.segment(layout.begin(s), layout.size(s));
}

MetricsRecord run_slot(SlicingEnv& env, Controller& controller, SharedDb& db,
                       const SlotOptions& options) {
  const std::int64_t t = env.state().t;
  if (!db.complete(t - 1)) {
    throw OrchestrationError("records of slot " + std::to_string(t - 1) + " are incomplete");
  }
  const bool trigger =
      db.trigger(t - 1) || options.force_trigger || controller.allocates_every_slot();
  if (trigger) {
    env.global_step(controller.global_action(env, options.explore));
  } else {
    env.keep_inter();
  }
  for (int s = 0; s < env.num_slices(); ++s) {
    env.slice_step(s, controller.slice_action(env, s, options.explore));
  }
  const SlotOutcome out = env.complete_slot();
  const ScenarioState& st = env.state();
  const ScenarioConfig& cfg = env.config();
  for (int s = 0; s < env.num_slices(); ++s) {
    const auto& f = out.flags[std::size_t(s)];
    db.publish(s, t, {out.slice_satisfaction[s], f.needs_resources, f.has_spare});
  }

  MetricsRecord m;
  m.slot = t;
  m.triggered = trigger;
  m.global_valid = out.global_valid;
  m.slice_valid = out.slice_valid;
  m.slice_fraction = st.inter_fractions;
  m.slice_satisfaction = out.slice_satisfaction;
  m.slice_cost = out.slice_cost;
  m.flags = out.flags;
  for (std::size_t s = 0; s < m.flags.size(); ++s) {
    m.flags[s].increased = out.change[s].increased;
    m.flags[s].decreased = out.change[s].decreased;
  }
  m.user_rate_bps = st.rates_bps;
  m.user_satisfaction = st.user_satisfaction;
  m.user_fraction = st.intra_fractions;
  m.user_wastage.resize(st.rates_bps.size());
  for (Eigen::Index u = 0; u < st.rates_bps.size(); ++u) {
    const int s = st.layout.slice_of(int(u));
    m.user_wastage[u] =
        resource_wastage(st.rates_bps[u], cfg.slices[std::size_t(s)].rate_requirement_bps);
  }
  m.system_satisfaction = out.system_satisfaction;
  m.total_cost = out.total_cost;
  m.cost_in_objective = controller.cost_in_objective();
  m.objective = m.cost_in_objective ? out.objective : cfg.alpha * out.system_satisfaction;
  m.global_reward = out.global_reward;
  m.slice_reward = out.slice_rewards;

  env.advance();
  controller.end_slot(env, out, options.learn);
  return m;
}

EpisodeMetrics run_episode(SlicingEnv& env, Controller& controller, std::uint64_t seed,
                           const EpisodeOptions& options, SharedDb* db_out) {
  env.reset(seed);
  const int n = env.num_slices();
  SharedDb db(n);
  db.publish_initial();
  const bool train = options.mode == RunMode::kTrain;
  const SlotOptions slot{train, train, train && options.force_trigger};

  EpisodeMetrics em;
  em.cumulative_reward.assign(std::size_t(n) + 1, 0.0);
  em.transitions.assign(std::size_t(n) + 1, 0);
  while (!env.done()) {
    MetricsRecord m = run_slot(env, controller, db, slot);
    if (m.triggered) {
      em.cumulative_reward[0] += m.global_reward;
      ++em.transitions[0];
    }
    for (int s = 0; s < n; ++s) {
      em.cumulative_reward[std::size_t(s) + 1] += m.slice_reward[s];
      ++em.transitions[std::size_t(s) + 1];
    }
    if (!options.keep_user_metrics) {
      m.user_rate_bps.resize(0);
      m.user_satisfaction.resize(0);
      m.user_fraction.resize(0);
      m.user_wastage.resize(0);
    }
    em.slots.push_back(std::move(m));
  }
  controller.end_episode();
  if (db_out) *db_out = std::move(db);
  return em;
}

}  // namespace slicesim
