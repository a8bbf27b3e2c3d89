#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fertbandit {

// Mechanistic yield-response families. MitscherlichShifted is the
// A*(1 - exp(-b*(x - d))) variant used only as a data generator in the
// misspecified experiments; the canonical Mitscherlich keeps the additive
// baseline d + A*(1 - exp(-b*x)).
enum class ModelKind {
  Mitscherlich,
  MichaelisMenten,
  QuadraticPlateau,
  Logistic,
  MitscherlichShifted,
};

// Parameter layouts:
//   Mitscherlich          (gain A, rate b, baseline d)
//   MichaelisMenten       (capacity a, half_saturation b, baseline d)
//   QuadraticPlateau      (intercept a, slope b, curvature c, knot x0)
//   Logistic              (span A, steepness B, midpoint C, baseline d)
//   MitscherlichShifted   (gain A, rate b, shift d)
using ParamVector = std::vector<double>;

struct EconomicParams {
  double yield_price = 0.0;  // $/bu, must be > 0
  double input_price = 0.0;  // $/lb N, must be >= 0
};

// One bandit observation: rate played, yield seen, realized profit.
struct Observation {
  double rate = 0.0;
  double yield = 0.0;
  double profit = 0.0;
};
using History = std::vector<Observation>;

// Discrete feasible rates, strictly increasing and nonnegative.
class ArmGrid {
 public:
  explicit ArmGrid(std::vector<double> rates);

  std::size_t size() const { return rates_.size(); }
  double operator[](std::size_t i) const { return rates_[i]; }
  const std::vector<double>& rates() const { return rates_; }
  double min_rate() const { return rates_.front(); }
  double max_rate() const { return rates_.back(); }

  // Index of the rate nearest to x; equidistant cases pick the lower rate.
  std::size_t closest_index(double x) const;

 private:
  std::vector<double> rates_;
};

std::size_t param_count(ModelKind kind);
const std::vector<std::string>& param_names(ModelKind kind);
std::string_view model_name(ModelKind kind);
std::optional<ModelKind> model_from_name(std::string_view name);

// Throws std::domain_error naming the violated invariant.
void validate_params(ModelKind kind, const ParamVector& theta);
void validate_econ(const EconomicParams& econ);

// Clamps theta in place onto the box that keeps the family's invariants
// satisfied (used between optimizer steps).
void clamp_to_valid(ModelKind kind, ParamVector& theta);

// Table-driven starting values commonly used when fitting each family.
ParamVector default_initial_params(ModelKind kind);

double evaluate(ModelKind kind, const ParamVector& theta, double x);

// d f / d theta, same layout as the parameter vector.
ParamVector grad_params(ModelKind kind, const ParamVector& theta, double x);

// First and second derivatives in the input x. The quadratic plateau uses
// its left branch at the knot and is flat beyond it.
double grad_x(ModelKind kind, const ParamVector& theta, double x);
double hessian_x(ModelKind kind, const ParamVector& theta, double x);

// Parameter gradients of grad_x / hessian_x, needed by the
// curvature-matched fitting objective.
ParamVector grad_x_params(ModelKind kind, const ParamVector& theta, double x);
ParamVector hessian_x_params(ModelKind kind, const ParamVector& theta, double x);

// profit(x) = yield_price * f(x) - input_price * x
double profit(ModelKind kind, const ParamVector& theta,
              const EconomicParams& econ, double x);

// Continuous profit maximizer clamped to [x_min, x_max]. Monotone families
// return x_max when the input is free (input_price == 0); the logistic falls
// back to a dense search when its stationary-point formula has no valid root.
double closed_form_optimum(ModelKind kind, const ParamVector& theta,
                           const EconomicParams& econ, double x_min,
                           double x_max);

// Grid index maximizing profit; ties go to the lower rate.
std::size_t best_grid_arm(ModelKind kind, const ParamVector& theta,
                          const EconomicParams& econ, const ArmGrid& grid);

}  // namespace fertbandit
