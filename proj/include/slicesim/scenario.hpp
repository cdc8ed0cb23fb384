#ifndef SLICESIM_SCENARIO_HPP_
#define SLICESIM_SCENARIO_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "slicesim/config.hpp"
#include "slicesim/isolation.hpp"
#include "slicesim/mobility.hpp"
#include "slicesim/qos.hpp"
#include "slicesim/random.hpp"

namespace slicesim {

/// Users of slice s occupy the contiguous global index range
/// [begin(s), begin(s) + size(s)).
class SliceLayout {
 public:
  SliceLayout() = default;
  explicit SliceLayout(const ScenarioConfig& config);

  int num_slices() const { return static_cast<int>(sizes_.size()); }
  int num_users() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int begin(int s) const { return offsets_[std::size_t(s)]; }
  int size(int s) const { return sizes_[std::size_t(s)]; }
  int slice_of(int user) const;

 private:
  std::vector<int> offsets_;
  std::vector<int> sizes_;
};

/// Full simulator state at the start (and, once a slot completes, the end)
/// of slot t. Current per-slot outputs (`rates_bps`, `satisfaction`, `flags`)
/// are filled by the environment as the slot is played.
struct ScenarioState {
  std::shared_ptr<const ScenarioConfig> config;
  SliceLayout layout;
  SatisfactionParams satisfaction_params;

  std::int64_t t = 0;
  std::vector<MobilityState> mobility;
  Eigen::VectorXd channel_gains;
  Eigen::VectorXd inter_fractions;
  Eigen::VectorXd intra_fractions;
  Eigen::VectorXd prev_inter_fractions;

  Eigen::VectorXd rates_bps;
  Eigen::VectorXd user_satisfaction;
  Eigen::VectorXd satisfaction;
  Eigen::VectorXd satisfaction_prev;
  std::vector<SliceFlags> flags;
  std::vector<SliceFlags> flags_prev;

  ScenarioRngs rngs{0};

  Area area() const { return {config->area_m}; }
  /// View of one slice's entries in a per-user vector.
  template <typename Vec>
  auto segment(Vec& v, int s) const {
    return v.segment(layout.begin(s), layout.size(s));
  }
};

/// Equal split of [1/n] clamped into `bounds`.
Eigen::VectorXd equal_split(int n, const FractionBounds& bounds);

/// Fresh scenario: uniform positions, equal-split allocations, and
/// needs_resources set on every slice so the first slot runs the inter-slice
/// stage. Throws ConfigError on an invalid config.
ScenarioState init_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Resamples channel gains for the current positions.
void sample_gains(ScenarioState& state);

/// Moves to slot t + 1: steps mobility, redraws gains, and rotates the
/// current-slot allocation, satisfaction and flags into the *_prev fields.
void advance_slot(ScenarioState& state);

/// Bitwise equality of every trajectory-relevant field.
bool same_trajectory_state(const ScenarioState& a, const ScenarioState& b);

}  // namespace slicesim

#endif  // SLICESIM_SCENARIO_HPP_
