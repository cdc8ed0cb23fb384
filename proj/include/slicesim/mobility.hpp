#ifndef SLICESIM_MOBILITY_HPP_
#define SLICESIM_MOBILITY_HPP_

#include <Eigen/Core>

#include "slicesim/config.hpp"
#include "slicesim/random.hpp"

namespace slicesim {

/// Square coverage area [0, side] x [0, side] with the gNodeB at its centre.
struct Area {
  double side_m = 500.0;

  Eigen::Vector2d center() const { return {side_m / 2, side_m / 2}; }
  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= 0 && p.y() >= 0 && p.x() <= side_m && p.y() <= side_m;
  }
};

/// Random-waypoint state of one user.
struct MobilityState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d waypoint = Eigen::Vector2d::Zero();
  double speed_m_s = 1.0;
  double pause_remaining_s = 0.0;

  bool operator==(const MobilityState&) const = default;
};

Eigen::Vector2d uniform_point(const Area& area, Rng& rng);

/// Uniform position, moving toward a fresh uniform waypoint.
MobilityState initial_mobility(const Area& area, const MobilityParams& params,
                               Rng& rng);

/// One time step of the random-waypoint model. A user that arrives at its
/// waypoint stops there for the rest of the step and draws a pause; residual
/// time is absorbed by the pause countdown.
MobilityState rwp_step(const MobilityState& m, double dt, const Area& area,
                       const MobilityParams& params, Rng& rng);

}  // namespace slicesim

#endif  // SLICESIM_MOBILITY_HPP_
