#pragma once

#include <functional>
#include <vector>

#include "fertbandit/models.hpp"
#include "fertbandit/rng.hpp"

namespace fertbandit::testing {

// Standard simulation constants shared across the suites.
inline ArmGrid standard_grid() {
  return ArmGrid({0.0, 50.0, 100.0, 150.0, 200.0, 250.0});
}

inline ParamVector truth_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mitscherlich:
      return {120.0, 0.015, 80.0};
    case ModelKind::MichaelisMenten:
      return {150.0, 100.0, 60.0};
    case ModelKind::QuadraticPlateau:
      return {80.0, 1.2, -0.003, 180.0};
    case ModelKind::Logistic:
      return {120.0, 0.05, 125.0, 70.0};
    case ModelKind::MitscherlichShifted:
      return {120.0, 0.015, 80.0};
  }
  return {};
}

inline const std::vector<ModelKind>& all_kinds() {
  static const std::vector<ModelKind> kinds{
      ModelKind::Mitscherlich, ModelKind::MichaelisMenten,
      ModelKind::QuadraticPlateau, ModelKind::Logistic,
      ModelKind::MitscherlichShifted};
  return kinds;
}

inline const std::vector<ModelKind>& canonical_kinds() {
  static const std::vector<ModelKind> kinds{
      ModelKind::Mitscherlich, ModelKind::MichaelisMenten,
      ModelKind::QuadraticPlateau, ModelKind::Logistic};
  return kinds;
}

// Random valid parameters within agronomically plausible ranges.
inline ParamVector random_params(ModelKind kind, RngStream& rng) {
  switch (kind) {
    case ModelKind::Mitscherlich:
    case ModelKind::MitscherlichShifted:
      return {rng.uniform(40.0, 200.0), rng.uniform(0.005, 0.05),
              rng.uniform(20.0, 120.0)};
    case ModelKind::MichaelisMenten:
      return {rng.uniform(60.0, 250.0), rng.uniform(30.0, 200.0),
              rng.uniform(20.0, 120.0)};
    case ModelKind::QuadraticPlateau:
      return {rng.uniform(40.0, 120.0), rng.uniform(0.4, 2.0),
              rng.uniform(-0.008, -0.001), rng.uniform(60.0, 240.0)};
    case ModelKind::Logistic:
      return {rng.uniform(40.0, 200.0), rng.uniform(0.01, 0.1),
              rng.uniform(40.0, 220.0), rng.uniform(20.0, 120.0)};
  }
  return {};
}

// Independent oracle: profit argmax over a dense grid.
inline std::pair<double, double> brute_force_optimum(
    ModelKind kind, const ParamVector& theta, const EconomicParams& econ,
    double x_min, double x_max, double step = 0.01) {
  double best_x = x_min;
  double best_p = profit(kind, theta, econ, x_min);
  for (double x = x_min + step; x <= x_max + step / 2.0; x += step) {
    const double xx = std::min(x, x_max);
    const double p = profit(kind, theta, econ, xx);
    if (p > best_p) {
      best_p = p;
      best_x = xx;
    }
  }
  return {best_x, best_p};
}

// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline History noiseless_history(ModelKind kind, const ParamVector& theta,
                                 const ArmGrid& grid,
                                 const EconomicParams& econ) {
  History history;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = evaluate(kind, theta, grid[i]);
    history.push_back(
        {grid[i], y, econ.yield_price * y - econ.input_price * grid[i]});
  }
  return history;
}

}  // namespace fertbandit::testing
