#include "slicesim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slicesim/channel.hpp"

namespace slicesim {

double required_fraction(double r_req_bps, double slice_bw_hz, double gain, double p_w,
                         double n0_w_hz) {
  if (r_req_bps <= 0.0) return 0.0;
  if (data_rate_bps(1.0, slice_bw_hz, gain, p_w, n0_w_hz) < r_req_bps) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (data_rate_bps(mid, slice_bw_hz, gain, p_w, n0_w_hz) < r_req_bps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

RssiIpAllocation rssi_ip_allocate(const ScenarioState& state,
                                  const std::vector<int>& contracted_users,
                                  int max_iterations, double tolerance) {
  const ScenarioConfig& cfg = *state.config;
  const int n = state.layout.num_slices();
  if (int(contracted_users.size()) != n) {
    throw std::invalid_argument("rssi_ip_allocate: one contracted count per slice");
  }
  RssiIpAllocation out;
  out.inter = Eigen::VectorXd::Zero(n);
  out.intra = Eigen::VectorXd::Zero(state.layout.num_users());
  out.demand = Eigen::VectorXd::Zero(n);

  const double w = cfg.total_bandwidth_hz;
  for (int s = 0; s < n; ++s) {
    const double req = cfg.slices[std::size_t(s)].rate_requirement_bps;
    for (int u = state.layout.begin(s); u < state.layout.begin(s) + state.layout.size(s); ++u) {
      out.intra[u] = required_fraction(req, w, state.channel_gains[u], cfg.tx_power_w,
                                       cfg.noise_density_w_per_hz);
      out.demand[s] += out.intra[u];
    }
  }

  Eigen::VectorXd contract(n);
  for (int s = 0; s < n; ++s) {
    contract[s] = double(std::max(contracted_users[std::size_t(s)], 0)) *
                  cfg.slices[std::size_t(s)].rate_requirement_bps;
  }
  if (contract.sum() > 0) contract /= contract.sum();

  Eigen::VectorXd grant = out.demand.cwiseMin(contract);
  for (int it = 0; it < max_iterations; ++it) {
    const double spare = 1.0 - grant.sum();
    const Eigen::VectorXd unmet = (out.demand - grant).cwiseMax(0.0);
    const double unmet_total = unmet.sum();
    if (spare <= tolerance || unmet_total <= tolerance) break;
    out.iterations = it + 1;
    const Eigen::VectorXd step = unmet * std::min(1.0, spare / unmet_total);
    grant += step;
    if (step.sum() < tolerance) break;
  }
  out.inter = grant;
  out.shortfall = out.demand.sum() > 1.0 + tolerance;

  for (int s = 0; s < n; ++s) {
    auto seg = out.intra.segment(state.layout.begin(s), state.layout.size(s));
    if (out.demand[s] > 0) {
      seg /= out.demand[s];
    } else {
      seg.setZero();
      out.inter[s] = 0.0;
    }
  }
  return out;
}

std::vector<int> reference_contracted_users(const ScenarioConfig& config) {
  const ScenarioConfig ref = default_config();
  std::vector<int> out;
  for (const auto& s : config.slices) {
    int users = s.num_users;
    for (const auto& r : ref.slices) {
      if (r.name == s.name) users = r.num_users;
    }
    out.push_back(users);
  }
  return out;
}

}  // namespace slicesim
