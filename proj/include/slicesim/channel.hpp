#ifndef SLICESIM_CHANNEL_HPP_
#define SLICESIM_CHANNEL_HPP_

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "slicesim/random.hpp"

namespace slicesim {

/// Urban path loss in dB; `fc_ghz` is the carrier in GHz.
template <typename Scalar>
Scalar path_loss_db(Scalar d_m, Scalar fc_ghz, Scalar shadow_db) {
  using std::log10;
  if (!(d_m > Scalar(0))) throw std::domain_error("path_loss_db: distance <= 0");
  if (!(fc_ghz > Scalar(0))) throw std::domain_error("path_loss_db: fc <= 0");
  return Scalar(28) + Scalar(22) * log10(d_m) + Scalar(20) * log10(fc_ghz) +
         shadow_db;
}

template <typename Scalar>
Scalar db_to_linear_loss(Scalar loss_db) {
  using std::pow;
  return pow(Scalar(10), -loss_db / Scalar(10));
}

/// Shannon rate of a user holding `f_frac` of a slice of `slice_bw_hz`.
/// Zero bandwidth yields zero rate (the f -> 0+ limit).
template <typename Scalar>
Scalar data_rate_bps(Scalar f_frac, Scalar slice_bw_hz, Scalar gain, Scalar p_w,
                     Scalar n0_w_hz) {
  using std::log2;
  const Scalar bw = f_frac * slice_bw_hz;
  if (!(bw > Scalar(0))) return Scalar(0);
  return bw * log2(Scalar(1) + p_w * gain / (bw * n0_w_hz));
}

/// Elementwise rates over per-user fractions and gains.
template <typename DerivedF, typename DerivedG>
Eigen::ArrayXd data_rates_bps(const Eigen::ArrayBase<DerivedF>& fractions,
                              double slice_bw_hz,
                              const Eigen::ArrayBase<DerivedG>& gains,
                              double p_w, double n0_w_hz) {
  Eigen::ArrayXd out(fractions.size());
  for (Eigen::Index i = 0; i < fractions.size(); ++i) {
    out[i] = data_rate_bps(double(fractions[i]), slice_bw_hz, double(gains[i]),
                           p_w, n0_w_hz);
  }
  return out;
}

struct ChannelSample {
  double distance_m = 1.0;
  double path_loss_db = 0.0;
  double shadow_db = 0.0;
  double fading_power = 1.0;
  double gain = 0.0;
};

/// |h|^2 for h ~ CN(0, 1): sum of two N(0, 1/2) squares.
double sample_fading_power(Rng& rng);

/// One draw of shadowing and Rayleigh fading at the given distance.
ChannelSample channel_gain(double d_m, double fc_ghz, double shadow_std_db,
                           Rng& shadow_rng, Rng& fading_rng);

}  // namespace slicesim

#endif  // SLICESIM_CHANNEL_HPP_
