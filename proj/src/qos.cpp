#include "slicesim/qos.hpp"

#include <cmath>
#include <stdexcept>

namespace slicesim {

double phi(double xi) {
  if (!(xi > 1.0)) throw std::domain_error("phi: xi must be > 1");
  const double a = std::pow(xi - 1.0, 1.0 / xi);
  const double b = std::pow(xi - 1.0, (1.0 - xi) / xi);
  return 1.0 - std::exp(-1.0 / (a + b));
}

SatisfactionParams SatisfactionParams::make(double rho, double xi) {
  if (!(rho > 0)) throw std::domain_error("SatisfactionParams: rho <= 0");
  return {rho, xi, slicesim::phi(xi)};
}

double user_satisfaction(double r_bps, double r_req_bps,
                         const SatisfactionParams& p) {
  const double x = p.rho * r_bps / r_req_bps;
  if (!(x > 0.0)) return 0.0;
  // gamma / x = x^(xi-1) / (1 + x^xi), evaluated without forming x^xi for
  // large x where it would overflow.
  double ratio;
  if (x > 1.0) {
    ratio = 1.0 / (x * (1.0 + std::pow(x, -p.xi)));
  } else {
    const double xp = std::pow(x, p.xi);
    ratio = xp / (x * (1.0 + xp));
  }
  return -std::expm1(-ratio) / p.phi;
}

double satisfaction_peak_ratio(const SatisfactionParams& p) {
  return std::pow(p.xi - 1.0, 1.0 / p.xi) / p.rho;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("mean_of: empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double resource_wastage(double r_bps, double r_req_bps) {
  if (r_bps > r_req_bps) return std::exp(-r_req_bps / r_bps);
  return 0.0;
}

}  // namespace slicesim
