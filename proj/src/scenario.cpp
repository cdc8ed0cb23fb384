#include "slicesim/scenario.hpp"

#include <algorithm>
#include <stdexcept>

#include "slicesim/channel.hpp"

namespace slicesim {

SliceLayout::SliceLayout(const ScenarioConfig& config) {
  offsets_.push_back(0);
  for (const auto& s : config.slices) {
    sizes_.push_back(s.num_users);
    offsets_.push_back(offsets_.back() + s.num_users);
  }
}

int SliceLayout::slice_of(int user) const {
  if (user < 0 || user >= num_users()) {
    throw std::out_of_range("SliceLayout::slice_of");
  }
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), user);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

Eigen::VectorXd equal_split(int n, const FractionBounds& bounds) {
  return Eigen::VectorXd::Constant(n, std::clamp(1.0 / n, bounds.min, bounds.max));
}

void sample_gains(ScenarioState& state) {
  const auto& cfg = *state.config;
  const int n = state.layout.num_users();
  if (cfg.frozen_gains) {
    state.channel_gains = Eigen::Map<const Eigen::VectorXd>(
        cfg.frozen_gains->data(), Eigen::Index(cfg.frozen_gains->size()));
    return;
  }
  const Eigen::Vector2d bs = state.area().center();
  state.channel_gains.resize(n);
  for (int u = 0; u < n; ++u) {
    const double d = std::max((state.mobility[std::size_t(u)].position - bs).norm(),
                              cfg.min_distance_m);
    state.channel_gains[u] =
        channel_gain(d, cfg.carrier_freq_ghz, cfg.shadow_std_db,
                     state.rngs.shadowing, state.rngs.fading)
            .gain;
  }
}

ScenarioState init_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  validate(config);
  ScenarioState st;
  st.config = std::make_shared<const ScenarioConfig>(config);
  st.layout = SliceLayout(config);
  st.satisfaction_params = SatisfactionParams::make(config.rho, config.xi);
  st.rngs = ScenarioRngs(seed);
  st.t = 0;

  const int num_slices = config.num_slices();
  const int num_users = st.layout.num_users();
  const Area area = st.area();
  st.mobility.reserve(std::size_t(num_users));
  for (int u = 0; u < num_users; ++u) {
    st.mobility.push_back(initial_mobility(area, config.mobility, st.rngs.mobility));
  }

  st.inter_fractions = equal_split(num_slices, config.global_fraction_bounds);
  st.prev_inter_fractions = st.inter_fractions;
  st.intra_fractions.resize(num_users);
  for (int s = 0; s < num_slices; ++s) {
    st.segment(st.intra_fractions, s) =
        equal_split(st.layout.size(s), config.slices[std::size_t(s)].user_fraction_bounds);
  }

  st.rates_bps = Eigen::VectorXd::Zero(num_users);
  st.user_satisfaction = Eigen::VectorXd::Zero(num_users);
  st.satisfaction = Eigen::VectorXd::Zero(num_slices);
  st.satisfaction_prev = Eigen::VectorXd::Zero(num_slices);
  st.flags.assign(std::size_t(num_slices), SliceFlags{});
  st.flags_prev.assign(std::size_t(num_slices), SliceFlags{true, false, false, false});

  sample_gains(st);
  return st;
}

void advance_slot(ScenarioState& state) {
  const auto& cfg = *state.config;
  const Area area = state.area();
  ++state.t;
  for (auto& m : state.mobility) {
    m = rwp_step(m, cfg.slot_duration_s, area, cfg.mobility, state.rngs.mobility);
  }
  sample_gains(state);
  state.prev_inter_fractions = state.inter_fractions;
  state.satisfaction_prev = state.satisfaction;
  state.flags_prev = state.flags;
}

bool same_trajectory_state(const ScenarioState& a, const ScenarioState& b) {
  return a.t == b.t && a.mobility == b.mobility &&
         a.channel_gains == b.channel_gains &&
         a.inter_fractions == b.inter_fractions &&
         a.intra_fractions == b.intra_fractions &&
         a.prev_inter_fractions == b.prev_inter_fractions &&
         a.rates_bps == b.rates_bps &&
         a.user_satisfaction == b.user_satisfaction &&
         a.satisfaction == b.satisfaction &&
         a.satisfaction_prev == b.satisfaction_prev && a.flags == b.flags &&
         a.flags_prev == b.flags_prev && a.rngs == b.rngs;
}

}  // namespace slicesim
