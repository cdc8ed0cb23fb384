#ifndef SLICESIM_ISOLATION_HPP_
#define SLICESIM_ISOLATION_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "slicesim/config.hpp"

namespace slicesim {

/// Reconfiguration flags of one slice. `needs_resources` and `has_spare` are
/// derived from the previous slot; `increased` / `decreased` describe the
/// change applied in the current slot.
struct SliceFlags {
  bool needs_resources = false;
  bool has_spare = false;
  bool increased = false;
  bool decreased = false;

  bool operator==(const SliceFlags&) const = default;
};

/// What one slice looked like at the end of a slot.
struct SliceSnapshot {
  Eigen::Ref<const Eigen::VectorXd> rates_bps;
  Eigen::Ref<const Eigen::VectorXd> user_fractions;
  Eigen::Ref<const Eigen::VectorXd> gains;
  double rate_requirement_bps;
  double satisfaction;
  FractionBounds user_bounds;
};

/// Indices (within the slice) of users with rate <= requirement.
std::vector<int> unsatisfied_users(const SliceSnapshot& s);

/// 1 - sum of user fractions.
double residual_fraction(const SliceSnapshot& s);

bool needs_resources(const SliceSnapshot& s);
bool has_spare(const SliceSnapshot& s, double gamma_th);

/// needs_resources / has_spare of a slice; the kappa fields stay false.
SliceFlags evaluate_flags(const SliceSnapshot& s, double gamma_th);

double slice_recon_cost(double gamma_prev, double gamma_now, double bw_prev,
                        double bw_now);
double total_recon_cost(const Eigen::Ref<const Eigen::VectorXd>& costs);

/// Which constraint families an action is checked against.
struct ValidityRules {
  bool bounds = true;        // 26c / 26e
  bool implications = true;  // 26g / 26h
  bool exclusivity = true;   // 26i

  static ValidityRules full() { return {}; }
  static ValidityRules budget_only() { return {false, false, false}; }
};

/// One violated constraint. `id` is one of "26b", "26c", "26d", "26e",
/// "26g", "26h", "26i"; `index` is the slice or user, -1 for budget checks.
struct Violation {
  std::string id;
  int index = -1;

  bool operator==(const Violation&) const = default;
};

using Violations = std::vector<Violation>;

/// Budget tolerance applied to fraction sums.
inline constexpr double kBudgetTolerance = 1e-12;

Violations validate_inter_action(
    const Eigen::Ref<const Eigen::VectorXd>& fractions,
    const std::vector<SliceFlags>& flags_prev,
    const Eigen::Ref<const Eigen::VectorXd>& fractions_prev,
    const FractionBounds& bounds, const ValidityRules& rules = {});

Violations validate_intra_action(
    const Eigen::Ref<const Eigen::VectorXd>& fractions,
    const FractionBounds& bounds, const ValidityRules& rules = {});

/// kappa_1 / kappa_2 for a slice going from `prev` to `now`.
SliceFlags change_indicators(double prev, double now);

inline double objective(double gamma_sys, double cost_total, double alpha) {
  return alpha * gamma_sys - (1.0 - alpha) * cost_total;
}

}  // namespace slicesim

#endif  // SLICESIM_ISOLATION_HPP_
