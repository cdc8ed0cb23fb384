#include "slicesim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace slicesim {

namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("bad value: ") + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError(prefix + it.key(), "unknown configuration key");
    }
  }
}

FractionBounds bounds_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(field, "expected [min, max]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

int ScenarioConfig::num_users() const {
  int total = 0;
  for (const auto& s : slices) total += s.num_users;
  return total;
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

ScenarioConfig default_config() {
  ScenarioConfig c;
  c.total_bandwidth_hz = 20e6;
  c.tx_power_w = dbm_to_watt(30.0);
  c.noise_density_w_per_hz = dbm_to_watt(-174.0);
  c.carrier_freq_ghz = 3.0;
  c.area_m = 500.0;
  c.slices = {
      {"eMBB", 20, 10e6, {0.005, 0.5}},
      {"URLLC", 70, 250e3, {0.0014, 0.14}},
      {"mMTC", 210, 12e3, {0.00047, 0.047}},
  };
  return c;
}

void validate(const ScenarioConfig& c) {
  if (!(c.total_bandwidth_hz > 0)) {
    throw ConfigError("total_bandwidth_hz", "must be > 0");
  }
  if (!(c.tx_power_w > 0)) throw ConfigError("tx_power_dbm", "must be finite");
  if (!(c.noise_density_w_per_hz > 0)) {
    throw ConfigError("noise_density_dbm_per_hz", "must be finite");
  }
  if (!(c.carrier_freq_ghz > 0)) {
    throw ConfigError("carrier_freq_ghz", "must be > 0");
  }
  if (!(c.area_m > 0)) throw ConfigError("area_m", "must be > 0");
  if (!(c.shadow_std_db >= 0)) throw ConfigError("shadow_std_db", "must be >= 0");
  if (!(c.min_distance_m > 0)) {
    throw ConfigError("min_distance_m", "must be > 0");
  }
  if (c.slices.empty()) throw ConfigError("slices", "at least one slice");
  const auto& g = c.global_fraction_bounds;
  if (!(0.0 <= g.min && g.min <= g.max && g.max <= 1.0)) {
    throw ConfigError("global_fraction_bounds", "need 0 <= min <= max <= 1");
  }
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) {
    throw ConfigError("alpha", "must lie in [0, 1]");
  }
  if (!(c.rho > 0)) throw ConfigError("rho", "must be > 0");
  if (!(c.xi > 1)) throw ConfigError("xi", "must be > 1");
  if (!(c.gamma_th > 0 && c.gamma_th <= 1)) {
    throw ConfigError("gamma_th", "must lie in (0, 1]");
  }
  if (!(c.slot_duration_s > 0)) {
    throw ConfigError("slot_duration_s", "must be > 0");
  }
  if (c.steps_per_episode < 1) {
    throw ConfigError("steps_per_episode", "must be >= 1");
  }
  const auto& m = c.mobility;
  if (!(m.v_min_m_s > 0 && m.v_min_m_s <= m.v_max_m_s)) {
    throw ConfigError("mobility.speed_range_m_s", "need 0 < v_min <= v_max");
  }
  if (!(m.pause_max_s >= 0)) {
    throw ConfigError("mobility.pause_max_s", "must be >= 0");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.slices.size(); ++i) {
    const auto& s = c.slices[i];
    const std::string prefix = "slices[" + std::to_string(i) + "].";
    if (s.num_users < 1) throw ConfigError(prefix + "num_users", "must be >= 1");
    if (!(s.rate_requirement_bps > 0)) {
      throw ConfigError(prefix + "rate_requirement_bps", "must be > 0");
    }
    const auto& b = s.user_fraction_bounds;
    if (!(0.0 < b.min && b.min <= b.max && b.max <= 1.0)) {
      throw ConfigError(prefix + "user_fraction_bounds",
                        "need 0 < min <= max <= 1");
    }
    if (!names.insert(s.name).second) {
      throw ConfigError(prefix + "name", "duplicate slice name");
    }
  }
  if (c.frozen_gains) {
    if (static_cast<int>(c.frozen_gains->size()) != c.num_users()) {
      throw ConfigError("frozen_gains", "need one gain per user");
    }
    for (double g : *c.frozen_gains) {
      if (!(g > 0) || !std::isfinite(g)) {
        throw ConfigError("frozen_gains", "gains must be positive");
      }
    }
  }
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  reject_unknown(j,
                 {"total_bandwidth_hz", "tx_power_dbm", "noise_density_dbm_per_hz",
                  "carrier_freq_ghz", "area_m", "shadow_std_db", "min_distance_m",
                  "slices", "global_fraction_bounds", "alpha", "rho", "xi",
                  "gamma_th", "slot_duration_s", "steps_per_episode", "mobility",
                  "rng_seed", "frozen_gains"},
                 "");
  ScenarioConfig c = default_config();
  read_field(j, "total_bandwidth_hz", c.total_bandwidth_hz);
  if (j.contains("tx_power_dbm")) {
    double dbm = 0;
    read_field(j, "tx_power_dbm", dbm);
    c.tx_power_w = dbm_to_watt(dbm);
  }
  if (j.contains("noise_density_dbm_per_hz")) {
    double dbm = 0;
    read_field(j, "noise_density_dbm_per_hz", dbm);
    c.noise_density_w_per_hz = dbm_to_watt(dbm);
  }
  read_field(j, "carrier_freq_ghz", c.carrier_freq_ghz);
  read_field(j, "area_m", c.area_m);
  read_field(j, "shadow_std_db", c.shadow_std_db);
  read_field(j, "min_distance_m", c.min_distance_m);
  read_field(j, "alpha", c.alpha);
  read_field(j, "rho", c.rho);
  read_field(j, "xi", c.xi);
  read_field(j, "gamma_th", c.gamma_th);
  read_field(j, "slot_duration_s", c.slot_duration_s);
  read_field(j, "steps_per_episode", c.steps_per_episode);
  read_field(j, "rng_seed", c.rng_seed);
  if (j.contains("global_fraction_bounds")) {
    c.global_fraction_bounds =
        bounds_from_json(j["global_fraction_bounds"], "global_fraction_bounds");
  }
  if (j.contains("mobility")) {
    const auto& m = j["mobility"];
    reject_unknown(m, {"speed_range_m_s", "pause_max_s"}, "mobility.");
    if (m.contains("speed_range_m_s")) {
      auto b = bounds_from_json(m["speed_range_m_s"], "mobility.speed_range_m_s");
      c.mobility.v_min_m_s = b.min;
      c.mobility.v_max_m_s = b.max;
    }
    read_field(m, "pause_max_s", c.mobility.pause_max_s);
  }
  if (j.contains("slices")) {
    const auto& arr = j["slices"];
    if (!arr.is_array()) throw ConfigError("slices", "expected an array");
    c.slices.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& s = arr[i];
      const std::string prefix = "slices[" + std::to_string(i) + "].";
      reject_unknown(s,
                     {"name", "num_users", "rate_requirement_bps",
                      "user_fraction_bounds"},
                     prefix);
      SliceSpec spec;
      spec.name = "slice" + std::to_string(i);
      read_field(s, "name", spec.name);
      read_field(s, "num_users", spec.num_users);
      read_field(s, "rate_requirement_bps", spec.rate_requirement_bps);
      if (!s.contains("user_fraction_bounds")) {
        throw ConfigError(prefix + "user_fraction_bounds", "missing");
      }
      spec.user_fraction_bounds = bounds_from_json(
          s["user_fraction_bounds"], prefix + "user_fraction_bounds");
      c.slices.push_back(spec);
    }
  }
  if (j.contains("frozen_gains") && !j["frozen_gains"].is_null()) {
    std::vector<double> g;
    read_field(j, "frozen_gains", g);
    c.frozen_gains = std::move(g);
  }
  validate(c);
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["total_bandwidth_hz"] = c.total_bandwidth_hz;
  j["tx_power_dbm"] = watt_to_dbm(c.tx_power_w);
  j["noise_density_dbm_per_hz"] = watt_to_dbm(c.noise_density_w_per_hz);
  j["carrier_freq_ghz"] = c.carrier_freq_ghz;
  j["area_m"] = c.area_m;
  j["shadow_std_db"] = c.shadow_std_db;
  j["min_distance_m"] = c.min_distance_m;
  j["global_fraction_bounds"] = {c.global_fraction_bounds.min,
                                 c.global_fraction_bounds.max};
  j["alpha"] = c.alpha;
  j["rho"] = c.rho;
  j["xi"] = c.xi;
  j["gamma_th"] = c.gamma_th;
  j["slot_duration_s"] = c.slot_duration_s;
  j["steps_per_episode"] = c.steps_per_episode;
  j["rng_seed"] = c.rng_seed;
  j["mobility"] = {
      {"speed_range_m_s", {c.mobility.v_min_m_s, c.mobility.v_max_m_s}},
      {"pause_max_s", c.mobility.pause_max_s}};
  j["slices"] = json::array();
  for (const auto& s : c.slices) {
    j["slices"].push_back(
        {{"name", s.name},
         {"num_users", s.num_users},
         {"rate_requirement_bps", s.rate_requirement_bps},
         {"user_fraction_bounds",
          {s.user_fraction_bounds.min, s.user_fraction_bounds.max}}});
  }
  if (c.frozen_gains) j["frozen_gains"] = *c.frozen_gains;
  return j;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  return config_from_json(j);
}

void save_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << config_to_json(config).dump(2) << "\n";
}

ScenarioConfig with_user_counts(ScenarioConfig config,
                                const std::vector<int>& users) {
  if (users.size() != config.slices.size()) {
    throw ConfigError("slices", "user count list length mismatch");
  }
  for (std::size_t i = 0; i < users.size(); ++i) {
    config.slices[i].num_users = users[i];
  }
  config.frozen_gains.reset();
  validate(config);
  return config;
}

}  // namespace slicesim
