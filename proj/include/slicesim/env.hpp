#ifndef SLICESIM_ENV_HPP_
#define SLICESIM_ENV_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "slicesim/isolation.hpp"
#include "slicesim/scenario.hpp"

namespace slicesim {

/// What the inter-slice agent sees: satisfaction, both flag vectors and the
/// fractions of the previous slot. Flattened in that order (4 * |S| values).
struct GlobalObservation {
  Eigen::VectorXd slice_sats_prev;
  Eigen::VectorXd needs_flags_prev;
  Eigen::VectorXd spare_flags_prev;
  Eigen::VectorXd fractions_prev;

  Eigen::VectorXd flatten() const;
  static GlobalObservation unflatten(const Eigen::Ref<const Eigen::VectorXd>& flat);
};

/// Current channel gains of the users of one slice.
struct SliceObservation {
  Eigen::VectorXd gains;
};

/// Box of fractions an agent acts in.
struct ActionSpace {
  int dim = 0;
  double low = 0.0;
  double high = 1.0;

  /// Affine map from [-1, 1]^dim; the result is clamped into [low, high].
  Eigen::VectorXd to_fractions(const Eigen::Ref<const Eigen::VectorXf>& a) const;
  Eigen::VectorXf to_agent(const Eigen::Ref<const Eigen::VectorXd>& f) const;
};

struct StepResult {
  bool valid = true;
  Violations violations;
  /// Slice reward, known immediately; global reward waits for complete_slot.
  double reward = 0.0;
};

/// Everything computed once every stage of a slot has been played.
struct SlotOutcome {
  std::int64_t t = 0;
  bool global_acted = false;
  bool global_valid = true;
  double global_reward = 0.0;
  std::vector<bool> slice_valid;
  Eigen::VectorXd slice_rewards;
  Eigen::VectorXd slice_satisfaction;
  Eigen::VectorXd slice_cost;
  double system_satisfaction = 0.0;
  double total_cost = 0.0;
  double objective = 0.0;
  std::vector<SliceFlags> flags;  // derived from this slot, governs the next
  std::vector<SliceFlags> change;  // kappa indicators of this slot
  bool done = false;
};

/// Two-level slicing environment. Within a slot, call either global_step or
/// keep_inter, then slice_step once per slice, then complete_slot, then
/// advance. Out-of-order calls throw std::logic_error.
class SlicingEnv {
 public:
  explicit SlicingEnv(ScenarioConfig config,
                      ValidityRules rules = ValidityRules::full());

  GlobalObservation reset(std::uint64_t seed);

  const ScenarioState& state() const { return state_; }
  const ScenarioConfig& config() const { return *state_.config; }
  const ValidityRules& rules() const { return rules_; }
  int num_slices() const { return state_.layout.num_slices(); }
  int steps_taken() const { return steps_; }
  bool done() const { return steps_ >= config().steps_per_episode; }

  GlobalObservation global_observation() const;
  SliceObservation slice_observation(int s) const;

  ActionSpace global_action_space() const;
  ActionSpace slice_action_space(int s) const;

  /// Validity of an inter-slice action; an invalid action leaves the
  /// previous fractions in force.
  StepResult global_step(const Eigen::Ref<const Eigen::VectorXd>& fractions);
  /// Carries the previous inter-slice fractions over unchanged.
  void keep_inter();
  /// Applies (or, if invalid, ignores) an intra-slice action and returns the
  /// slice reward.
  StepResult slice_step(int s, const Eigen::Ref<const Eigen::VectorXd>& fractions);
  SlotOutcome complete_slot();
  void advance();

  /// Machine-readable description of both MDP interfaces.
  nlohmann::json descriptor() const;

 private:
  enum class Phase { kInter, kIntra, kComplete };

  void evaluate_slice(int s);

  ValidityRules rules_;
  ScenarioConfig base_config_;
  ScenarioState state_;
  Phase phase_ = Phase::kInter;
  int steps_ = 0;
  bool global_acted_ = false;
  bool global_valid_ = true;
  std::vector<bool> slice_done_;
  std::vector<bool> slice_valid_;
};

/// Log10-gain standardiser with running mean / variance over all entries.
class GainNormalizer {
 public:
  void update(const Eigen::Ref<const Eigen::VectorXd>& gains);
  Eigen::VectorXf encode(const Eigen::Ref<const Eigen::VectorXd>& gains) const;

  double mean() const { return mean_; }
  double stddev() const;
  std::int64_t count() const { return count_; }
  void set_state(std::int64_t count, double mean, double m2) {
    count_ = count;
    mean_ = mean;
    m2_ = m2;
  }
  double m2() const { return m2_; }

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace slicesim

#endif  // SLICESIM_ENV_HPP_
