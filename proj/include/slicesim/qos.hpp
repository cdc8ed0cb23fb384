#ifndef SLICESIM_QOS_HPP_
#define SLICESIM_QOS_HPP_

#include <span>

namespace slicesim {

/// Normalisation constant of the satisfaction utility; requires xi > 1.
double phi(double xi);

struct SatisfactionParams {
  double rho = 1.3;
  double xi = 5.0;
  double phi = 0.0;

  static SatisfactionParams make(double rho, double xi);
};

/// Degree of satisfaction in [0, 1]. Peaks at exactly 1 when
/// r / r_req = (xi - 1)^(1/xi) / rho; r = 0 maps to the limit 0.
double user_satisfaction(double r_bps, double r_req_bps,
                         const SatisfactionParams& params);

/// Rate ratio r / r_req at which user_satisfaction reaches 1.
double satisfaction_peak_ratio(const SatisfactionParams& params);

/// Mean of a non-empty list (slice and system satisfaction, total cost).
double mean_of(std::span<const double> values);

inline double slice_satisfaction(std::span<const double> user_sats) {
  return mean_of(user_sats);
}
inline double system_satisfaction(std::span<const double> slice_sats) {
  return mean_of(slice_sats);
}

/// exp(-r_req / r) for over-served users, 0 otherwise.
double resource_wastage(double r_bps, double r_req_bps);

}  // namespace slicesim

#endif  // SLICESIM_QOS_HPP_
