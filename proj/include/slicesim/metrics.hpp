#ifndef SLICESIM_METRICS_HPP_
#define SLICESIM_METRICS_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "slicesim/isolation.hpp"

namespace slicesim {

/// Every reported quantity of one slot.
struct MetricsRecord {
  std::int64_t slot = 0;
  bool triggered = false;
  bool global_valid = true;
  std::vector<bool> slice_valid;

  Eigen::VectorXd slice_fraction;
  Eigen::VectorXd slice_satisfaction;
  Eigen::VectorXd slice_cost;
  std::vector<SliceFlags> flags;

  Eigen::VectorXd user_rate_bps;
  Eigen::VectorXd user_satisfaction;
  Eigen::VectorXd user_fraction;
  Eigen::VectorXd user_wastage;

  double system_satisfaction = 0.0;
  double total_cost = 0.0;
  /// alpha * satisfaction - (1 - alpha) * cost, or alpha * satisfaction
  /// when `cost_in_objective` is false.
  double objective = 0.0;
  bool cost_in_objective = true;

  double global_reward = 0.0;
  Eigen::VectorXd slice_reward;
};

struct EpisodeMetrics {
  std::vector<MetricsRecord> slots;
  /// Sum of rewards over the transitions each agent produced; index 0 is
  /// the inter-slice agent, 1 + s the agent of slice s.
  std::vector<double> cumulative_reward;
  std::vector<std::int64_t> transitions;
};

}  // namespace slicesim

#endif  // SLICESIM_METRICS_HPP_
