#ifndef SLICESIM_CONFIG_HPP_
#define SLICESIM_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace slicesim {

/// Raised when a configuration violates an invariant. `field()` names the
/// offending entry using its configuration-file key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct FractionBounds {
  double min = 0.0;
  double max = 1.0;
};

struct SliceSpec {
  std::string name;
  int num_users = 1;
  double rate_requirement_bps = 1.0;
  FractionBounds user_fraction_bounds;
};

struct MobilityParams {
  double v_min_m_s = 1.0;
  double v_max_m_s = 4.0;
  double pause_max_s = 300.0;
};

/// All scenario inputs. Power terms are stored in SI units; the file format
/// carries them in dBm and dBm/Hz.
struct ScenarioConfig {
  double total_bandwidth_hz = 20e6;
  double tx_power_w = 1.0;
  double noise_density_w_per_hz = 3.981071705534952e-21;
  double carrier_freq_ghz = 3.0;
  double area_m = 500.0;
  double shadow_std_db = 4.0;
  double min_distance_m = 1.0;
  std::vector<SliceSpec> slices;
  FractionBounds global_fraction_bounds{0.01, 0.95};
  double alpha = 0.5;
  double rho = 1.3;
  double xi = 5.0;
  double gamma_th = 0.8;
  double slot_duration_s = 1.0;
  int steps_per_episode = 50;
  MobilityParams mobility;
  std::uint64_t rng_seed = 1;
  /// Flattened per-user gains held constant every slot (mobility and fading
  /// are then ignored). Used for oracle instances.
  std::optional<std::vector<double>> frozen_gains;

  int num_slices() const { return static_cast<int>(slices.size()); }
  int num_users() const;
};

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

/// Three-slice eMBB / URLLC / mMTC cell with the reference RAN parameters.
ScenarioConfig default_config();

/// Throws ConfigError naming the first violated field.
void validate(const ScenarioConfig& config);

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& config, const std::string& path);

/// Returns a copy with slice populations replaced by `users` (one per slice).
ScenarioConfig with_user_counts(ScenarioConfig config,
                                const std::vector<int>& users);

}  // namespace slicesim

#endif  // SLICESIM_CONFIG_HPP_
