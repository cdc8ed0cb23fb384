#ifndef SLICESIM_BASELINES_HPP_
#define SLICESIM_BASELINES_HPP_

#include <vector>

#include <Eigen/Core>

#include "slicesim/env.hpp"
#include "slicesim/scenario.hpp"

namespace slicesim {

/// Same dynamics and rewards with validity reduced to the two budget
/// constraints. Actions then range over [0, 1] instead of the slice bounds.
inline SlicingEnv make_wic_env(ScenarioConfig config) {
  return SlicingEnv(std::move(config), ValidityRules::budget_only());
}

/// Smallest fraction f of `slice_bw_hz` with rate(f) >= r_req, found by
/// bisection. Returns 1 when even the whole slice falls short.
double required_fraction(double r_req_bps, double slice_bw_hz, double gain, double p_w,
                         double n0_w_hz);

struct RssiIpAllocation {
  Eigen::VectorXd inter;      // per slice
  Eigen::VectorXd intra;      // per user, laid out like ScenarioState
  Eigen::VectorXd demand;     // per slice, fraction of the cell
  bool shortfall = false;     // total demand exceeded the cell
  int iterations = 0;
};

/// Demand-driven sharing with contracted guarantees. Each slice asks for the
/// bandwidth that puts every user exactly at its requirement. A slice is
/// guaranteed its contracted share (proportional to contracted users times
/// requirement); bandwidth unused by under-demand slices is handed to
/// over-demand slices in proportion to their unmet demand until nothing is
/// left to move. Users then split their slice in proportion to their need.
RssiIpAllocation rssi_ip_allocate(const ScenarioState& state,
                                  const std::vector<int>& contracted_users,
                                  int max_iterations = 20, double tolerance = 1e-6);

/// Contracted users per slice: the slice populations of the reference cell.
std::vector<int> reference_contracted_users(const ScenarioConfig& config);

}  // namespace slicesim

#endif  // SLICESIM_BASELINES_HPP_
