#include "fertbandit/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fertbandit {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" +
                      value + "'");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" +
                    value + "'");
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const auto& part : split_list(value)) {
    out.push_back(parse_double(key, part));
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': list must be nonempty");
  }
  return out;
}

ModelKind parse_model(const std::string& key, const std::string& value) {
  if (auto kind = model_from_name(value)) return *kind;
  throw ConfigError("config key '" + key + "': unknown model '" + value + "'");
}

void apply_scenario(ExperimentConfig& config, const std::string& value) {
  if (value == "well_specified") {
    config.scenario = Scenario::WellSpecified;
    config.truth_kind = ModelKind::QuadraticPlateau;
    config.truth_theta = {80.0, 1.2, -0.003, 180.0};
    config.fitted_kind = ModelKind::QuadraticPlateau;
    config.horizon = 30;
  } else if (value == "misspecified") {
    config.scenario = Scenario::Misspecified;
    config.truth_kind = ModelKind::MitscherlichShifted;
    config.truth_theta = {120.0, 0.015, 80.0};
    config.fitted_kind = ModelKind::QuadraticPlateau;
    config.horizon = 100;
  } else {
    throw ConfigError(
        "config key 'scenario': expected well_specified or misspecified, "
        "got '" +
        value + "'");
  }
}

}  // namespace

void apply_override(ExperimentConfig& config, const std::string& raw_key,
                    const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "scenario") {
    apply_scenario(config, value);
  } else if (key == "truth_kind") {
    config.truth_kind = parse_model(key, value);
  } else if (key == "truth_theta") {
    config.truth_theta = parse_double_list(key, value);
  } else if (key == "fitted_kind") {
    config.fitted_kind = parse_model(key, value);
  } else if (key == "theta_init") {
    config.theta_init = parse_double_list(key, value);
  } else if (key == "grid") {
    config.grid_rates = parse_double_list(key, value);
  } else if (key == "p_y") {
    config.yield_price = parse_double(key, value);
  } else if (key == "p_x") {
    config.input_prices = parse_double_list(key, value);
  } else if (key == "sigma") {
    config.sigma = parse_double(key, value);
  } else if (key == "T") {
    config.horizon = static_cast<int>(parse_int(key, value));
  } else if (key == "replicates") {
    config.replicates = static_cast<int>(parse_int(key, value));
  } else if (key == "base_seed") {
    config.base_seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "policies") {
    config.policies.clear();
    for (const auto& name : split_list(value)) {
      auto kind = policy_from_name(name);
      if (!kind) {
        throw ConfigError("config key 'policies': unknown policy '" + name +
                          "'");
      }
      config.policies.push_back(*kind);
    }
    if (config.policies.empty()) {
      throw ConfigError("config key 'policies': list must be nonempty");
    }
  } else if (key == "epsilon_exponent") {
    config.epsilon_exponent = parse_double(key, value);
  } else if (key == "alpha") {
    config.alpha = parse_double(key, value);
  } else if (key == "alpha1") {
    config.alpha1 = parse_double(key, value);
  } else if (key == "alpha2") {
    config.alpha2 = parse_double(key, value);
  } else if (key == "k") {
    config.k = static_cast<int>(parse_int(key, value));
  } else if (key == "burn_in") {
    config.burn_in = static_cast<int>(parse_int(key, value));
  } else if (key == "probe_h") {
    config.probe_step = parse_double(key, value);
  } else if (key == "probe_m") {
    config.probe_repeats = static_cast<int>(parse_int(key, value));
  } else if (key == "count_probes") {
    config.count_probes = parse_bool(key, value);
  } else if (key == "noise") {
    if (value == "gaussian") {
      config.noise = NoiseKind::Gaussian;
    } else if (value == "bounded_uniform") {
      config.noise = NoiseKind::BoundedUniform;
    } else {
      throw ConfigError(
          "config key 'noise': expected gaussian or bounded_uniform, got '" +
          value + "'");
    }
  } else if (key == "threads") {
    config.threads = static_cast<int>(parse_int(key, value));
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value, got '" + line + "'");
    }
    apply_override(config, line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void finalize_config(ExperimentConfig& config) {
  if (config.theta_init.empty()) {
    config.theta_init = default_initial_params(config.fitted_kind);
  }
  validate_params(config.truth_kind, config.truth_theta);
  validate_params(config.fitted_kind, config.theta_init);
  ArmGrid grid(config.grid_rates);  // validates the grid
  (void)grid;
  if (config.horizon < 1) throw ConfigError("config: T must be >= 1");
  if (config.replicates < 1) {
    throw ConfigError("config: replicates must be >= 1");
  }
  if (config.input_prices.empty()) {
    throw ConfigError("config: p_x list must be nonempty");
  }
  if (!(config.yield_price > 0.0)) {
    throw ConfigError("config: p_y must be > 0");
  }
  for (double px : config.input_prices) {
    if (!(px >= 0.0)) throw ConfigError("config: p_x values must be >= 0");
  }
  if (!(config.sigma >= 0.0)) throw ConfigError("config: sigma must be >= 0");
  if (config.k < 1) throw ConfigError("config: k must be >= 1");
  if (!(config.epsilon_exponent > 0.0)) {
    throw ConfigError("config: epsilon_exponent must be > 0");
  }
  if (config.alpha < 0.0 || config.alpha1 < 0.0 || config.alpha2 < 0.0) {
    throw ConfigError("config: alpha weights must be >= 0");
  }
  if (!(config.probe_step > 0.0)) {
    throw ConfigError("config: probe_h must be > 0");
  }
  if (config.probe_repeats < 1) {
    throw ConfigError("config: probe_m must be >= 1");
  }
  if (config.threads < 0) throw ConfigError("config: threads must be >= 0");
}

PolicyConfig make_policy_config(const ExperimentConfig& config,
                                PolicyKind kind) {
  PolicyConfig pc;
  pc.kind = kind;
  pc.fitted_model = config.fitted_kind;
  pc.epsilon_exponent = config.epsilon_exponent;
  pc.alpha = config.alpha;
  pc.alpha1 = config.alpha1;
  pc.alpha2 = config.alpha2;
  pc.k = config.k;
  pc.theta_init = config.theta_init.empty()
                      ? default_initial_params(config.fitted_kind)
                      : config.theta_init;
  pc.burn_in = config.burn_in;
  return pc;
}

}  // namespace fertbandit
