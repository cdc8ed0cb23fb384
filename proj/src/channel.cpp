#include "slicesim/channel.hpp"

#include <limits>

namespace slicesim {

double sample_fading_power(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return re * re + im * im;
}

ChannelSample channel_gain(double d_m, double fc_ghz, double shadow_std_db,
                           Rng& shadow_rng, Rng& fading_rng) {
  ChannelSample s;
  s.distance_m = d_m;
  s.shadow_db = shadow_std_db > 0
                    ? std::normal_distribution<double>(0.0, shadow_std_db)(shadow_rng)
                    : 0.0;
  s.path_loss_db = path_loss_db(d_m, fc_ghz, s.shadow_db);
  s.fading_power = sample_fading_power(fading_rng);
  // An exact zero draw would give a zero gain; keep the gain strictly positive.
  s.fading_power = std::max(s.fading_power, std::numeric_limits<double>::min());
  s.gain = db_to_linear_loss(s.path_loss_db) * s.fading_power;
  return s;
}

}  // namespace slicesim
