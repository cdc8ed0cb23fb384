#include "slicesim/isolation.hpp"

#include <cmath>
#include <stdexcept>

namespace slicesim {

std::vector<int> unsatisfied_users(const SliceSnapshot& s) {
  std::vector<int> out;
  for (Eigen::Index u = 0; u < s.rates_bps.size(); ++u) {
    if (s.rates_bps[u] <= s.rate_requirement_bps) out.push_back(int(u));
  }
  return out;
}

double residual_fraction(const SliceSnapshot& s) {
  return 1.0 - s.user_fractions.sum();
}

bool needs_resources(const SliceSnapshot& s) {
  const auto unsatisfied = unsatisfied_users(s);
  if (unsatisfied.empty()) return false;
  const double residual = residual_fraction(s);
  const double threshold = s.user_bounds.min;
  if (residual <= threshold) return true;  // Constraint 1
  Eigen::Index weakest = 0;
  s.gains.minCoeff(&weakest);
  const double worst_case_need =
      s.user_fractions[weakest] * static_cast<double>(unsatisfied.size());
  return residual >= threshold && worst_case_need >= residual;  // Constraint 2
}

bool has_spare(const SliceSnapshot& s, double gamma_th) {
  if (!unsatisfied_users(s).empty()) return false;
  if (s.satisfaction < gamma_th) return true;  // Constraint 3
  return residual_fraction(s) >= s.user_bounds.min;  // Constraint 4
}

SliceFlags evaluate_flags(const SliceSnapshot& s, double gamma_th) {
  SliceFlags f;
  f.needs_resources = needs_resources(s);
  f.has_spare = has_spare(s, gamma_th);
  return f;
}

double slice_recon_cost(double gamma_prev, double gamma_now, double bw_prev,
                        double bw_now) {
  if (bw_prev != bw_now && gamma_now < gamma_prev) return gamma_prev - gamma_now;
  return 0.0;
}

double total_recon_cost(const Eigen::Ref<const Eigen::VectorXd>& costs) {
  if (costs.size() == 0) throw std::domain_error("total_recon_cost: no slices");
  return costs.mean();
}

SliceFlags change_indicators(double prev, double now) {
  SliceFlags f;
  f.increased = now >= prev;
  f.decreased = now <= prev;
  return f;
}

namespace {

void check_bounds(const Eigen::Ref<const Eigen::VectorXd>& fractions,
                  const FractionBounds& bounds, const char* id,
                  Violations& out) {
  for (Eigen::Index i = 0; i < fractions.size(); ++i) {
    const double f = fractions[i];
    if (!(f >= bounds.min && f <= bounds.max)) out.push_back({id, int(i)});
  }
}

bool within_unit_budget(const Eigen::Ref<const Eigen::VectorXd>& fractions) {
  const double sum = fractions.sum();
  return std::isfinite(sum) && sum <= 1.0 + kBudgetTolerance &&
         (fractions.array() >= 0.0).all();
}

}  // namespace

Violations validate_inter_action(
    const Eigen::Ref<const Eigen::VectorXd>& fractions,
    const std::vector<SliceFlags>& flags_prev,
    const Eigen::Ref<const Eigen::VectorXd>& fractions_prev,
    const FractionBounds& bounds, const ValidityRules& rules) {
  if (fractions.size() != fractions_prev.size() ||
      static_cast<std::size_t>(fractions.size()) != flags_prev.size()) {
    throw std::invalid_argument("validate_inter_action: dimension mismatch");
  }
  Violations out;
  if (!within_unit_budget(fractions)) out.push_back({"26b", -1});
  if (rules.bounds) check_bounds(fractions, bounds, "26c", out);
  for (Eigen::Index s = 0; s < fractions.size(); ++s) {
    const SliceFlags kappa = change_indicators(fractions_prev[s], fractions[s]);
    const SliceFlags& theta = flags_prev[std::size_t(s)];
    if (rules.implications) {
      if (theta.needs_resources && !kappa.increased) out.push_back({"26g", int(s)});
      if (theta.has_spare && !kappa.decreased) out.push_back({"26h", int(s)});
    }
    // An unchanged slice has kappa_1 = kappa_2 = 1 and is compliant.
    if (rules.exclusivity && fractions[s] != fractions_prev[s] &&
        kappa.increased == kappa.decreased) {
      out.push_back({"26i", int(s)});
    }
  }
  return out;
}

Violations validate_intra_action(
    const Eigen::Ref<const Eigen::VectorXd>& fractions,
    const FractionBounds& bounds, const ValidityRules& rules) {
  Violations out;
  if (!within_unit_budget(fractions)) out.push_back({"26d", -1});
  if (rules.bounds) check_bounds(fractions, bounds, "26e", out);
  return out;
}

}  // namespace slicesim
