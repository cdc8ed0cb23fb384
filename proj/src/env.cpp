#include "slicesim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slicesim/channel.hpp"

namespace slicesim {

Eigen::VectorXd GlobalObservation::flatten() const {
  const Eigen::Index n = slice_sats_prev.size();
  Eigen::VectorXd out(4 * n);
  out << slice_sats_prev, needs_flags_prev, spare_flags_prev, fractions_prev;
  return out;
}

GlobalObservation GlobalObservation::unflatten(
    const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() % 4 != 0) {
    throw std::invalid_argument("GlobalObservation: size not a multiple of 4");
  }
  const Eigen::Index n = flat.size() / 4;
  return {flat.segment(0, n), flat.segment(n, n), flat.segment(2 * n, n),
          flat.segment(3 * n, n)};
}

Eigen::VectorXd ActionSpace::to_fractions(
    const Eigen::Ref<const Eigen::VectorXf>& a) const {
  if (a.size() != dim) throw std::invalid_argument("ActionSpace: wrong dimension");
  Eigen::VectorXd f(dim);
  for (int i = 0; i < dim; ++i) {
    const double unit = (std::clamp(double(a[i]), -1.0, 1.0) + 1.0) / 2.0;
    f[i] = std::clamp(low + unit * (high - low), low, high);
  }
  return f;
}

Eigen::VectorXf ActionSpace::to_agent(const Eigen::Ref<const Eigen::VectorXd>& f) const {
  Eigen::VectorXf a(f.size());
  const double span = high - low;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    a[i] = span > 0 ? float(2.0 * (f[i] - low) / span - 1.0) : 0.0f;
  }
  return a;
}

SlicingEnv::SlicingEnv(ScenarioConfig config, ValidityRules rules)
    : rules_(rules), base_config_(std::move(config)) {
  validate(base_config_);
  reset(base_config_.rng_seed);
}

GlobalObservation SlicingEnv::reset(std::uint64_t seed) {
  state_ = init_scenario(base_config_, seed);
  phase_ = Phase::kInter;
  steps_ = 0;
  slice_done_.assign(std::size_t(num_slices()), false);
  slice_valid_.assign(std::size_t(num_slices()), true);
  return global_observation();
}

GlobalObservation SlicingEnv::global_observation() const {
  const int n = num_slices();
  GlobalObservation o;
  o.slice_sats_prev = state_.satisfaction_prev;
  o.needs_flags_prev.resize(n);
  o.spare_flags_prev.resize(n);
  for (int s = 0; s < n; ++s) {
    o.needs_flags_prev[s] = state_.flags_prev[std::size_t(s)].needs_resources ? 1.0 : 0.0;
    o.spare_flags_prev[s] = state_.flags_prev[std::size_t(s)].has_spare ? 1.0 : 0.0;
  }
  o.fractions_prev = state_.prev_inter_fractions;
  return o;
}

SliceObservation SlicingEnv::slice_observation(int s) const {
  return {state_.segment(state_.channel_gains, s)};
}

ActionSpace SlicingEnv::global_action_space() const {
  const auto& b = config().global_fraction_bounds;
  if (!rules_.bounds) return {num_slices(), 0.0, 1.0};
  return {num_slices(), b.min, b.max};
}

ActionSpace SlicingEnv::slice_action_space(int s) const {
  const auto& b = config().slices.at(std::size_t(s)).user_fraction_bounds;
  const int n = state_.layout.size(s);
  if (!rules_.bounds) return {n, 0.0, 1.0};
  return {n, b.min, b.max};
}

StepResult SlicingEnv::global_step(const Eigen::Ref<const Eigen::VectorXd>& fractions) {
  if (phase_ != Phase::kInter) throw std::logic_error("global_step: wrong phase");
  if (fractions.size() != num_slices()) {
    throw std::invalid_argument("global_step: action dimension mismatch");
  }
  // No allocation was in force before the first slot, so the implication
  // constraints have nothing to compare against there.
  const std::vector<SliceFlags> no_flags(static_cast<std::size_t>(num_slices()));
  const auto& flags = state_.t == 0 ? no_flags : state_.flags_prev;
  StepResult r;
  r.violations = validate_inter_action(fractions, flags, state_.prev_inter_fractions,
                                       config().global_fraction_bounds, rules_);
  r.valid = r.violations.empty();
  if (r.valid) state_.inter_fractions = fractions;
  global_acted_ = true;
  global_valid_ = r.valid;
  phase_ = Phase::kIntra;
  return r;
}

void SlicingEnv::keep_inter() {
  if (phase_ != Phase::kInter) throw std::logic_error("keep_inter: wrong phase");
  state_.inter_fractions = state_.prev_inter_fractions;
  global_acted_ = false;
  global_valid_ = true;
  phase_ = Phase::kIntra;
}

void SlicingEnv::evaluate_slice(int s) {
  const auto& cfg = config();
  const auto& spec = cfg.slices[std::size_t(s)];
  const double slice_bw = state_.inter_fractions[s] * cfg.total_bandwidth_hz;
  const int begin = state_.layout.begin(s);
  const int n = state_.layout.size(s);
  for (int u = begin; u < begin + n; ++u) {
    const double r = data_rate_bps(state_.intra_fractions[u], slice_bw,
                                   state_.channel_gains[u], cfg.tx_power_w,
                                   cfg.noise_density_w_per_hz);
    state_.rates_bps[u] = r;
    state_.user_satisfaction[u] =
        user_satisfaction(r, spec.rate_requirement_bps, state_.satisfaction_params);
  }
  state_.satisfaction[s] = state_.segment(state_.user_satisfaction, s).mean();
}

StepResult SlicingEnv::slice_step(int s, const Eigen::Ref<const Eigen::VectorXd>& fractions) {
  if (phase_ != Phase::kIntra) throw std::logic_error("slice_step: wrong phase");
  if (s < 0 || s >= num_slices()) throw std::out_of_range("slice_step: slice");
  if (slice_done_[std::size_t(s)]) throw std::logic_error("slice_step: slice stepped twice");
  if (fractions.size() != state_.layout.size(s)) {
    throw std::invalid_argument("slice_step: action dimension mismatch");
  }
  StepResult r;
  r.violations = validate_intra_action(
      fractions, config().slices[std::size_t(s)].user_fraction_bounds, rules_);
  r.valid = r.violations.empty();
  if (r.valid) state_.segment(state_.intra_fractions, s) = fractions;
  evaluate_slice(s);
  r.reward = r.valid ? state_.satisfaction[s] : -1.0;
  slice_done_[std::size_t(s)] = true;
  slice_valid_[std::size_t(s)] = r.valid;
  return r;
}

SlotOutcome SlicingEnv::complete_slot() {
  if (phase_ != Phase::kIntra ||
      !std::all_of(slice_done_.begin(), slice_done_.end(), [](bool b) { return b; })) {
    throw std::logic_error("complete_slot: not every slice has been stepped");
  }
  const auto& cfg = config();
  const int n = num_slices();
  SlotOutcome o;
  o.t = state_.t;
  o.global_acted = global_acted_;
  o.global_valid = global_valid_;
  o.slice_valid = slice_valid_;
  o.slice_rewards.resize(n);
  o.slice_cost.resize(n);
  o.flags.resize(std::size_t(n));
  o.change.resize(std::size_t(n));
  for (int s = 0; s < n; ++s) {
    o.slice_rewards[s] = slice_valid_[std::size_t(s)] ? state_.satisfaction[s] : -1.0;
    o.slice_cost[s] = slice_recon_cost(
        state_.satisfaction_prev[s], state_.satisfaction[s],
        state_.prev_inter_fractions[s] * cfg.total_bandwidth_hz,
        state_.inter_fractions[s] * cfg.total_bandwidth_hz);
    const SliceSnapshot snap{state_.segment(state_.rates_bps, s),
                             state_.segment(state_.intra_fractions, s),
                             state_.segment(state_.channel_gains, s),
                             cfg.slices[std::size_t(s)].rate_requirement_bps,
                             state_.satisfaction[s],
                             cfg.slices[std::size_t(s)].user_fraction_bounds};
    state_.flags[std::size_t(s)] = evaluate_flags(snap, cfg.gamma_th);
    o.flags[std::size_t(s)] = state_.flags[std::size_t(s)];
    o.change[std::size_t(s)] =
        change_indicators(state_.prev_inter_fractions[s], state_.inter_fractions[s]);
  }
  o.slice_satisfaction = state_.satisfaction;
  o.system_satisfaction = state_.satisfaction.mean();
  o.total_cost = total_recon_cost(o.slice_cost);
  o.objective = objective(o.system_satisfaction, o.total_cost, cfg.alpha);
  o.global_reward = global_acted_ ? (global_valid_ ? o.objective : -1.0) : 0.0;
  ++steps_;
  o.done = done();
  phase_ = Phase::kComplete;
  return o;
}

void SlicingEnv::advance() {
  if (phase_ != Phase::kComplete) throw std::logic_error("advance: slot not complete");
  advance_slot(state_);
  phase_ = Phase::kInter;
  std::fill(slice_done_.begin(), slice_done_.end(), false);
  std::fill(slice_valid_.begin(), slice_valid_.end(), true);
}

nlohmann::json SlicingEnv::descriptor() const {
  nlohmann::json j;
  const auto g = global_action_space();
  j["steps_per_episode"] = config().steps_per_episode;
  j["validity"] = {{"bounds", rules_.bounds},
                   {"implications", rules_.implications},
                   {"exclusivity", rules_.exclusivity}};
  j["global"] = {{"observation_dim", 4 * num_slices()},
                 {"observation_layout",
                  {"slice_sats_prev", "needs_flags_prev", "spare_flags_prev",
                   "fractions_prev"}},
                 {"action_dim", g.dim},
                 {"action_low", g.low},
                 {"action_high", g.high},
                 {"reward_range", {-1.0, 1.0}},
                 {"invalid_reward", -1.0}};
  j["slices"] = nlohmann::json::array();
  for (int s = 0; s < num_slices(); ++s) {
    const auto a = slice_action_space(s);
    j["slices"].push_back({{"name", config().slices[std::size_t(s)].name},
                           {"observation_dim", a.dim},
                           {"observation", "channel_gain_linear"},
                           {"action_dim", a.dim},
                           {"action_low", a.low},
                           {"action_high", a.high},
                           {"reward_range", {-1.0, 1.0}},
                           {"invalid_reward", -1.0}});
  }
  return j;
}

void GainNormalizer::update(const Eigen::Ref<const Eigen::VectorXd>& gains) {
  for (Eigen::Index i = 0; i < gains.size(); ++i) {
    const double x = std::log10(gains[i]);
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / double(count_);
    m2_ += delta * (x - mean_);
  }
}

double GainNormalizer::stddev() const {
  if (count_ < 2) return 1.0;
  return std::sqrt(m2_ / double(count_ - 1));
}

Eigen::VectorXf GainNormalizer::encode(const Eigen::Ref<const Eigen::VectorXd>& gains) const {
  const double sd = std::max(stddev(), 1e-6);
  Eigen::VectorXf out(gains.size());
  for (Eigen::Index i = 0; i < gains.size(); ++i) {
    out[i] = float((std::log10(gains[i]) - mean_) / sd);
  }
  return out;
}

}  // namespace slicesim
