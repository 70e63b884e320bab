// leowb/scenario.hpp
//
// Scenario configuration and its text formats.
//
// Config files are flat key/value documents in a TOML subset:
//
//   # comment
//   [orbit]                 # optional table headers, grouping only
//   altitude_m = 600e3
//   eta_list = [0.9, 0.8, 0.65]
//   alpha = "auto"
//
// Keys are global; a table header does not prefix them. A JSON object is
// accepted instead when the first non-blank character is '{' (nested objects
// are flattened by leaf key). Missing keys keep their defaults and unknown
// keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "leowb/channel_model.hpp"
#include "leowb/lowrank_inverse.hpp"
#include "leowb/types.hpp"

namespace leowb {

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

class UnknownKey : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class RangeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct ScenarioConfig {
  // radio and array
  double carrier_Hz = 18e9;
  int array_nx = 16;
  int array_ny = 16;
  double element_spacing_wl = 0.5;
  int N_RF = 16;
  double P_t_W = 100.0;  // 20 dBW
  // orbit and users
  double altitude_m = 600e3;
  double pass_s = 120.0;
  double min_elevation_deg = 10.0;
  double centroid_lat_deg = 0.0;
  double centroid_lon_deg = 0.0;
  int K = 16;
  double footprint_radius_m = 250e3;
  double ut_gain_dBi = 39.7;
  double K_R_dB = 10.0;
  bool los_only = false;  ///< caps K_R at 1e12
  double atmospheric_loss_dB = 0.0;
  double bandwidth_Hz = 50e6;
  double noise_temperature_K = 290.0;
  double noise_variance_W = 0.0;  ///< 0 selects k T B
  // precoding cadence and regularization
  double update_rate_Hz = 20.0;
  std::optional<double> alpha;  ///< unset selects default_regularization
  int nlos_block = 1;
  int beam_hold = 1;
  // inverse maintenance
  std::vector<double> eta_list{0.9, 0.8, 0.65};
  int k_init = 2;
  int p = 1;
  int i_max = 6;
  double rank_ratio_threshold = 0.5;
  int reset_interval = 0;
  // campaign
  int mc_runs = 50;
  std::uint64_t seed = 42;

  /// Throws RangeError when a field or a cross-field constraint is violated.
  void validate() const;

  int snapshot_count() const;
  double noise_variance() const;
  double rician_K_dB() const;
  ArSvdConfig arsvd_config(double eta) const;
  UpdatePolicy update_policy() const;
  OrbitParams orbit_params() const;
  LinkParams link_params() const;
};

/// Parses a config document (TOML subset or JSON) over the defaults.
ScenarioConfig parse_config_text(const std::string& text);

/// Applies one `key=value` override. Values use the config value syntax; a
/// bare comma-separated list is accepted for list keys.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

/// Reads `path`, applies `overrides` in order, validates.
ScenarioConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

/// Fully resolved config, defaults included.
nlohmann::json to_json(const ScenarioConfig& cfg);

/// Names of every accepted key.
std::vector<std::string> config_keys();

}  // namespace leowb
