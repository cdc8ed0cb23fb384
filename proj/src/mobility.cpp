#include "slicesim/mobility.hpp"

#include <algorithm>

namespace slicesim {

Eigen::Vector2d uniform_point(const Area& area, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, area.side_m);
  const double x = u(rng);
  const double y = u(rng);
  return {x, y};
}

MobilityState initial_mobility(const Area& area, const MobilityParams& params,
                               Rng& rng) {
  MobilityState m;
  m.position = uniform_point(area, rng);
  m.waypoint = uniform_point(area, rng);
  m.speed_m_s = std::uniform_real_distribution<double>(params.v_min_m_s,
                                                       params.v_max_m_s)(rng);
  m.pause_remaining_s = 0.0;
  return m;
}

MobilityState rwp_step(const MobilityState& m, double dt, const Area& area,
                       const MobilityParams& params, Rng& rng) {
  MobilityState next = m;
  if (next.pause_remaining_s > 0.0) {
    next.pause_remaining_s = std::max(0.0, next.pause_remaining_s - dt);
    if (next.pause_remaining_s > 0.0) return next;
    // Pause over: pick the next leg, start moving on the following step.
    next.waypoint = uniform_point(area, rng);
    next.speed_m_s = std::uniform_real_distribution<double>(
        params.v_min_m_s, params.v_max_m_s)(rng);
    return next;
  }
  const Eigen::Vector2d delta = next.waypoint - next.position;
  const double remaining = delta.norm();
  const double travel = next.speed_m_s * dt;
  if (travel < remaining) {
    next.position += delta * (travel / remaining);
  } else {
    next.position = next.waypoint;
    next.pause_remaining_s =
        std::uniform_real_distribution<double>(0.0, params.pause_max_s)(rng);
    if (next.pause_remaining_s <= 0.0) {
      next.waypoint = uniform_point(area, rng);
      next.speed_m_s = std::uniform_real_distribution<double>(
          params.v_min_m_s, params.v_max_m_s)(rng);
    }
  }
  // Straight segments between two interior points stay interior; clamp only
  // guards against rounding at the border.
  next.position = next.position.cwiseMax(0.0).cwiseMin(area.side_m);
  return next;
}

}  // namespace slicesim
