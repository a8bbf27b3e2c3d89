#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fertbandit/models.hpp"
#include "fertbandit/rng.hpp"

namespace fertbandit {

enum class NoiseKind { Gaussian, BoundedUniform };

struct StepOutcome {
  double arm = 0.0;
  double yield = 0.0;
  double profit = 0.0;            // realized: yield_price * yield - cost
  double instantaneous_regret = 0.0;  // expected-profit gap vs the grid oracle
};

// Simulated field: noisy yields from a fixed truth model, plus the regret
// oracle. The reward stream and the curvature-probe stream are seeded
// independently so probing never shifts the main yield sequence.
class Environment {
 public:
  Environment(ModelKind truth_kind, ParamVector truth_theta,
              double noise_sigma, EconomicParams econ, ArmGrid grid,
              std::uint64_t seed, NoiseKind noise = NoiseKind::Gaussian);

  // One noisy pull at `rate` (normally a grid arm; the advisory path may
  // pass any rate >= 0). Regret compares noise-free expected profits.
  StepOutcome pull(double rate);

  // Mean of m independent noisy draws at x, from the probe stream only.
  // `draws`, when given, receives the individual draws.
  double probe(double x, int m, std::vector<double>* draws = nullptr);

  // (best grid arm index, its expected profit) under the truth model.
  std::pair<std::size_t, double> oracle() const {
    return {oracle_arm_, oracle_profit_};
  }

  double expected_yield(double x) const;
  double expected_profit(double x) const;

  const ArmGrid& grid() const { return grid_; }
  const EconomicParams& econ() const { return econ_; }
  ModelKind truth_kind() const { return truth_kind_; }
  const ParamVector& truth_theta() const { return truth_theta_; }
  double noise_sigma() const { return noise_sigma_; }

 private:
  double noise_draw(RngStream& stream);

  ModelKind truth_kind_;
  ParamVector truth_theta_;
  double noise_sigma_;
  EconomicParams econ_;
  ArmGrid grid_;
  NoiseKind noise_;
  RngStream reward_stream_;
  RngStream probe_stream_;
  std::size_t oracle_arm_ = 0;
  double oracle_profit_ = 0.0;
};

}  // namespace fertbandit
