#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fertbandit/environment.hpp"
#include "fertbandit/models.hpp"
#include "fertbandit/policies.hpp"

namespace fertbandit {

// Raised for malformed config files, unknown keys, or bad values; the CLI
// maps it to the usage exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { WellSpecified, Misspecified };

struct ExperimentConfig {
  Scenario scenario = Scenario::WellSpecified;
  ModelKind truth_kind = ModelKind::QuadraticPlateau;
  ParamVector truth_theta{80.0, 1.2, -0.003, 180.0};
  ModelKind fitted_kind = ModelKind::QuadraticPlateau;
  ParamVector theta_init;  // empty: use the fitted family's default initials
  std::vector<double> grid_rates{0.0, 50.0, 100.0, 150.0, 200.0, 250.0};
  double yield_price = 5.0;
  std::vector<double> input_prices{0.3, 0.5, 0.7};
  double sigma = 0.5;
  int horizon = 30;
  int replicates = 10;
  std::uint64_t base_seed = 0;
  std::vector<PolicyKind> policies{PolicyKind::EpsGreedy, PolicyKind::ModelUcb,
                                   PolicyKind::Violin, PolicyKind::LinUcb,
                                   PolicyKind::KnnUcb};
  double epsilon_exponent = 1.5;
  double alpha = 1.0;
  double alpha1 = 2.0;
  double alpha2 = 640.0;
  int k = 3;
  int burn_in = -1;
  double probe_step = 5.0;  // h for curvature probing, lb N/ac
  int probe_repeats = 3;    // m draws per probed point
  bool count_probes = false;
  NoiseKind noise = NoiseKind::Gaussian;
  int threads = 0;  // 0: hardware concurrency
  std::string out_dir = "out";
};

// Parses the flat key = value format ('#' starts a comment).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Applies one "key=value" override; throws ConfigError naming bad keys.
void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// Fills theta_init from the fitted family's defaults when left empty and
// checks cross-field invariants.
void finalize_config(ExperimentConfig& config);

PolicyConfig make_policy_config(const ExperimentConfig& config,
                                PolicyKind kind);

}  // namespace fertbandit
