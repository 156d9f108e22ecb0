#include "mimopc/config.hpp"

#include <cmath>
#include <fstream>

namespace mimopc {

Index NetworkConfig::grid_side() const {
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(num_cells))));
  return side;
}

Index NetworkConfig::tau_p() const { return pilot_len > 0 ? pilot_len : pilot_reuse * users_per_cell; }

Index NetworkConfig::tau_u() const {
  return ul_data >= 0 ? ul_data : (coherence_block - tau_p()) / 2;
}

Index NetworkConfig::tau_d() const {
  return dl_data >= 0 ? dl_data : (coherence_block - tau_p()) / 2;
}

double NetworkConfig::rho_ul() const {
  const double noise_w = std::pow(10.0, noise_power / 10.0) * 1e-3;
  return ul_power_budget / noise_w;
}

double NetworkConfig::rho_dl() const {
  const double noise_w = std::pow(10.0, noise_power / 10.0) * 1e-3;
  return dl_power_budget / noise_w;
}

void NetworkConfig::validate() const {
  if (num_cells < 1) throw ConfigError("num_cells must be positive");
  const Index s = grid_side();
  if (s * s != num_cells) throw ConfigError("num_cells must be a perfect square");
  if (users_per_cell < 1) throw ConfigError("users_per_cell must be positive");
  if (antennas < 1) throw ConfigError("antennas must be positive");
  if (!(area_side > 0)) throw ConfigError("area_side must be positive");
  if (pilot_reuse != 1 && pilot_reuse != 2 && pilot_reuse != 4) {
    throw ConfigError("pilot_reuse must be 1, 2 or 4");
  }
  if (pilot_len < 0) throw ConfigError("pilot_len must be nonnegative");
  if (tau_p() < 1) throw ConfigError("pilot length must be positive");
  if (tau_u() < 0 || tau_d() < 0) throw ConfigError("data lengths must be nonnegative");
  if (tau_p() + tau_u() + tau_d() > coherence_block) {
    throw ConfigError("tau_p + tau_u + tau_d exceeds the coherence block");
  }
  if (ul_power_budget < 0 || dl_power_budget < 0) throw ConfigError("power budgets must be >= 0");
  if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
  if (shadow_std < 0) throw ConfigError("shadow_std must be >= 0");
  if (asd < 0) throw ConfigError("asd must be >= 0");
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

NetworkConfig config_from_json(const nlohmann::json& j, NetworkConfig cfg) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "num_cells") read_field(j, "num_cells", cfg.num_cells);
    else if (k == "users_per_cell") read_field(j, "users_per_cell", cfg.users_per_cell);
    else if (k == "antennas") read_field(j, "antennas", cfg.antennas);
    else if (k == "area_side") read_field(j, "area_side", cfg.area_side);
    else if (k == "pilot_reuse") read_field(j, "pilot_reuse", cfg.pilot_reuse);
    else if (k == "coherence_block") read_field(j, "coherence_block", cfg.coherence_block);
    else if (k == "pilot_len") read_field(j, "pilot_len", cfg.pilot_len);
    else if (k == "ul_data") read_field(j, "ul_data", cfg.ul_data);
    else if (k == "dl_data") read_field(j, "dl_data", cfg.dl_data);
    else if (k == "ul_power_budget") read_field(j, "ul_power_budget", cfg.ul_power_budget);
    else if (k == "dl_power_budget") read_field(j, "dl_power_budget", cfg.dl_power_budget);
    else if (k == "noise_power") read_field(j, "noise_power", cfg.noise_power);
    else if (k == "pathloss_intercept") read_field(j, "pathloss_intercept", cfg.pathloss_intercept);
    else if (k == "pathloss_exponent_coeff") {
      read_field(j, "pathloss_exponent_coeff", cfg.pathloss_exponent_coeff);
    } else if (k == "shadow_std") read_field(j, "shadow_std", cfg.shadow_std);
    else if (k == "epsilon") read_field(j, "epsilon", cfg.epsilon);
    else if (k == "asd") read_field(j, "asd", cfg.asd);
    else if (k == "seed") read_field(j, "seed", cfg.seed);
    else throw ConfigError("unknown config key '" + k + "'");
  }
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const NetworkConfig& c) {
  return nlohmann::json{
      {"num_cells", c.num_cells},
      {"users_per_cell", c.users_per_cell},
      {"antennas", c.antennas},
      {"area_side", c.area_side},
      {"pilot_reuse", c.pilot_reuse},
      {"coherence_block", c.coherence_block},
      {"pilot_len", c.tau_p()},
      {"ul_data", c.tau_u()},
      {"dl_data", c.tau_d()},
      {"ul_power_budget", c.ul_power_budget},
      {"dl_power_budget", c.dl_power_budget},
      {"noise_power", c.noise_power},
      {"pathloss_intercept", c.pathloss_intercept},
      {"pathloss_exponent_coeff", c.pathloss_exponent_coeff},
      {"shadow_std", c.shadow_std},
      {"epsilon", c.epsilon},
      {"asd", c.asd},
      {"seed", c.seed},
  };
}

NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace mimopc
