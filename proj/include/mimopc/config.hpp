#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "mimopc/types.hpp"

namespace mimopc {

/// Thrown for malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkConfig {
  Index num_cells = 16;
  Index users_per_cell = 5;
  Index antennas = 100;
  double area_side = 1000.0;       // m
  int pilot_reuse = 1;             // f in {1, 2, 4}
  Index coherence_block = 200;     // tau_c
  Index pilot_len = 0;             // tau_p; 0 means f * K
  Index ul_data = -1;              // tau_u; -1 means floor((tau_c - tau_p) / 2)
  Index dl_data = -1;              // tau_d; same default as tau_u
  double ul_power_budget = 0.2;    // W per user
  double dl_power_budget = 40.0;   // W per BS
  double noise_power = -94.0;      // dBm
  double pathloss_intercept = -35.0;        // dB at 1 m
  double pathloss_exponent_coeff = 36.7;    // dB per decade
  double shadow_std = 7.0;         // dB
  double epsilon = 1e-3;
  double asd = 10.0;               // angular standard deviation, degrees
  std::uint64_t seed = 1;

  Index grid_side() const;
  Index tau_p() const;
  Index tau_u() const;
  Index tau_d() const;
  /// Transmit power normalized by the noise power (noise variance becomes 1).
  double rho_ul() const;
  double rho_dl() const;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Strict: unknown keys and wrong types raise ConfigError.
NetworkConfig config_from_json(const nlohmann::json& j, NetworkConfig base = {});
nlohmann::json config_to_json(const NetworkConfig& cfg);
NetworkConfig load_config(const std::string& path);

}  // namespace mimopc
