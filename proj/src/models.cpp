#include "fertbandit/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fertbandit {

namespace {

constexpr double kBoxFloor = 1e-8;

bool all_finite(const ParamVector& theta) {
  for (double v : theta) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

[[noreturn]] void fail(ModelKind kind, const std::string& what) {
  throw std::domain_error(std::string(model_name(kind)) + ": " + what);
}

// Numerically stable sigmoid.
double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double eval_raw(ModelKind kind, const ParamVector& t, double x) {
  switch (kind) {
    case ModelKind::Mitscherlich:
      return t[2] + t[0] * (1.0 - std::exp(-t[1] * x));
    case ModelKind::MichaelisMenten:
      return t[2] + t[0] * x / (t[1] + x);
    case ModelKind::QuadraticPlateau: {
      const double xe = std::min(x, t[3]);
      return t[0] + t[1] * xe + t[2] * xe * xe;
    }
    case ModelKind::Logistic:
      return t[3] + t[0] * sigmoid(t[1] * (x - t[2]));
    case ModelKind::MitscherlichShifted:
      return t[0] * (1.0 - std::exp(-t[1] * (x - t[2])));
  }
  return 0.0;
}

double profit_raw(ModelKind kind, const ParamVector& t,
                  const EconomicParams& econ, double x) {
  return econ.yield_price * eval_raw(kind, t, x) - econ.input_price * x;
}

// Dense fallback for optima without a usable closed form.
double dense_profit_search(ModelKind kind, const ParamVector& t,
                           const EconomicParams& econ, double x_min,
                           double x_max) {
  const double step = 0.001;
  double best_x = x_min;
  double best_p = profit_raw(kind, t, econ, x_min);
  const long n = std::lround(std::ceil((x_max - x_min) / step));
  for (long i = 1; i <= n; ++i) {
    const double x = std::min(x_min + step * static_cast<double>(i), x_max);
    const double p = profit_raw(kind, t, econ, x);
    if (p > best_p) {
      best_p = p;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace

ArmGrid::ArmGrid(std::vector<double> rates) : rates_(std::move(rates)) {
  if (rates_.empty()) throw std::domain_error("arm grid: must be nonempty");
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!std::isfinite(rates_[i]) || rates_[i] < 0.0) {
      throw std::domain_error("arm grid: rates must be finite and >= 0");
    }
    if (i > 0 && rates_[i] <= rates_[i - 1]) {
      throw std::domain_error("arm grid: rates must be strictly increasing");
    }
  }
}

std::size_t ArmGrid::closest_index(double x) const {
  std::size_t best = 0;
  double best_d = std::abs(rates_[0] - x);
  for (std::size_t i = 1; i < rates_.size(); ++i) {
    const double d = std::abs(rates_[i] - x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t param_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mitscherlich:
    case ModelKind::MichaelisMenten:
    case ModelKind::MitscherlichShifted:
      return 3;
    case ModelKind::QuadraticPlateau:
    case ModelKind::Logistic:
      return 4;
  }
  return 0;
}

const std::vector<std::string>& param_names(ModelKind kind) {
  static const std::vector<std::string> mitscherlich{"gain", "rate",
                                                     "baseline"};
  static const std::vector<std::string> mm{"capacity", "half_saturation",
                                           "baseline"};
  static const std::vector<std::string> quad{"intercept", "slope", "curvature",
                                             "knot"};
  static const std::vector<std::string> logistic{"span", "steepness",
                                                 "midpoint", "baseline"};
  static const std::vector<std::string> shifted{"gain", "rate", "shift"};
  switch (kind) {
    case ModelKind::Mitscherlich:
      return mitscherlich;
    case ModelKind::MichaelisMenten:
      return mm;
    case ModelKind::QuadraticPlateau:
      return quad;
    case ModelKind::Logistic:
      return logistic;
    case ModelKind::MitscherlichShifted:
      return shifted;
  }
  return mitscherlich;
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mitscherlich:
      return "mitscherlich";
    case ModelKind::MichaelisMenten:
      return "michaelis_menten";
    case ModelKind::QuadraticPlateau:
      return "quadratic_plateau";
    case ModelKind::Logistic:
      return "logistic";
    case ModelKind::MitscherlichShifted:
      return "mitscherlich_shifted";
  }
  return "";
}

std::optional<ModelKind> model_from_name(std::string_view name) {
  for (ModelKind kind :
       {ModelKind::Mitscherlich, ModelKind::MichaelisMenten,
        ModelKind::QuadraticPlateau, ModelKind::Logistic,
        ModelKind::MitscherlichShifted}) {
    if (name == model_name(kind)) return kind;
  }
  return std::nullopt;
}

void validate_params(ModelKind kind, const ParamVector& theta) {
  if (theta.size() != param_count(kind)) {
    fail(kind, "expects " + std::to_string(param_count(kind)) +
                   " parameters, got " + std::to_string(theta.size()));
  }
  if (!all_finite(theta)) fail(kind, "parameters must be finite");
  switch (kind) {
    case ModelKind::Mitscherlich:
    case ModelKind::MitscherlichShifted:
      if (theta[0] <= 0.0) fail(kind, "gain A must be > 0");
      if (theta[1] <= 0.0) fail(kind, "rate b must be > 0");
      break;
    case ModelKind::MichaelisMenten:
      if (theta[0] <= 0.0) fail(kind, "capacity a must be > 0");
      if (theta[1] <= 0.0) fail(kind, "half-saturation b must be > 0");
      break;
    case ModelKind::QuadraticPlateau:
      if (theta[2] >= 0.0) fail(kind, "curvature c must be < 0");
      if (theta[3] <= 0.0) fail(kind, "knot x0 must be > 0");
      break;
    case ModelKind::Logistic:
      if (theta[0] <= 0.0) fail(kind, "span A must be > 0");
      if (theta[1] <= 0.0) fail(kind, "steepness B must be > 0");
      break;
  }
}

void validate_econ(const EconomicParams& econ) {
  if (!std::isfinite(econ.yield_price) || econ.yield_price <= 0.0) {
    throw std::domain_error("economic params: yield price must be > 0");
  }
  if (!std::isfinite(econ.input_price) || econ.input_price < 0.0) {
    throw std::domain_error("economic params: input price must be >= 0");
  }
}

void clamp_to_valid(ModelKind kind, ParamVector& theta) {
  switch (kind) {
    case ModelKind::Mitscherlich:
    case ModelKind::MitscherlichShifted:
      theta[0] = std::max(theta[0], kBoxFloor);
      theta[1] = std::max(theta[1], kBoxFloor);
      break;
    case ModelKind::MichaelisMenten:
      theta[0] = std::max(theta[0], kBoxFloor);
      theta[1] = std::max(theta[1], kBoxFloor);
      break;
    case ModelKind::QuadraticPlateau:
      theta[2] = std::min(theta[2], -kBoxFloor);
      theta[3] = std::max(theta[3], kBoxFloor);
      break;
    case ModelKind::Logistic:
      theta[0] = std::max(theta[0], kBoxFloor);
      theta[1] = std::max(theta[1], kBoxFloor);
      break;
  }
}

ParamVector default_initial_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mitscherlich:
      return {100.0, 0.01, 75.0};
    case ModelKind::MichaelisMenten:
      return {120.0, 80.0, 50.0};
    case ModelKind::QuadraticPlateau:
      return {75.0, 1.0, -0.002, 160.0};
    case ModelKind::Logistic:
      return {100.0, 0.03, 100.0, 65.0};
    case ModelKind::MitscherlichShifted:
      return {100.0, 0.01, 75.0};
  }
  return {};
}

double evaluate(ModelKind kind, const ParamVector& theta, double x) {
  validate_params(kind, theta);
  return eval_raw(kind, theta, x);
}

ParamVector grad_params(ModelKind kind, const ParamVector& t, double x) {
  validate_params(kind, t);
  switch (kind) {
    case ModelKind::Mitscherlich: {
      const double decay = std::exp(-t[1] * x);
      return {1.0 - decay, t[0] * x * decay, 1.0};
    }
    case ModelKind::MichaelisMenten: {
      const double denom = t[1] + x;
      return {x / denom, -t[0] * x / (denom * denom), 1.0};
    }
    case ModelKind::QuadraticPlateau: {
      if (x <= t[3]) return {1.0, x, x * x, 0.0};
      return {1.0, t[3], t[3] * t[3], t[1] + 2.0 * t[2] * t[3]};
    }
    case ModelKind::Logistic: {
      const double s = sigmoid(t[1] * (x - t[2]));
      const double w = s * (1.0 - s);
      return {s, t[0] * w * (x - t[2]), -t[0] * t[1] * w, 1.0};
    }
    case ModelKind::MitscherlichShifted: {
      const double decay = std::exp(-t[1] * (x - t[2]));
      return {1.0 - decay, t[0] * (x - t[2]) * decay, -t[0] * t[1] * decay};
    }
  }
  return {};
}

double grad_x(ModelKind kind, const ParamVector& t, double x) {
  validate_params(kind, t);
  switch (kind) {
    case ModelKind::Mitscherlich:
      return t[0] * t[1] * std::exp(-t[1] * x);
    case ModelKind::MichaelisMenten: {
      const double denom = t[1] + x;
      return t[0] * t[1] / (denom * denom);
    }
    case ModelKind::QuadraticPlateau:
      return x <= t[3] ? t[1] + 2.0 * t[2] * x : 0.0;
    case ModelKind::Logistic: {
      const double s = sigmoid(t[1] * (x - t[2]));
      return t[0] * t[1] * s * (1.0 - s);
    }
    case ModelKind::MitscherlichShifted:
      return t[0] * t[1] * std::exp(-t[1] * (x - t[2]));
  }
  return 0.0;
}

double hessian_x(ModelKind kind, const ParamVector& t, double x) {
  validate_params(kind, t);
  switch (kind) {
    case ModelKind::Mitscherlich:
      return -t[0] * t[1] * t[1] * std::exp(-t[1] * x);
    case ModelKind::MichaelisMenten: {
      const double denom = t[1] + x;
      return -2.0 * t[0] * t[1] / (denom * denom * denom);
    }
    case ModelKind::QuadraticPlateau:
      return x <= t[3] ? 2.0 * t[2] : 0.0;
    case ModelKind::Logistic: {
      const double s = sigmoid(t[1] * (x - t[2]));
      return t[0] * t[1] * t[1] * s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case ModelKind::MitscherlichShifted:
      return -t[0] * t[1] * t[1] * std::exp(-t[1] * (x - t[2]));
  }
  return 0.0;
}

ParamVector grad_x_params(ModelKind kind, const ParamVector& t, double x) {
  validate_params(kind, t);
  switch (kind) {
    case ModelKind::Mitscherlich: {
      const double decay = std::exp(-t[1] * x);
      return {t[1] * decay, t[0] * decay * (1.0 - t[1] * x), 0.0};
    }
    case ModelKind::MichaelisMenten: {
      const double denom = t[1] + x;
      return {t[1] / (denom * denom),
              t[0] * (x - t[1]) / (denom * denom * denom), 0.0};
    }
    case ModelKind::QuadraticPlateau: {
      if (x <= t[3]) return {0.0, 1.0, 2.0 * x, 0.0};
      return {0.0, 0.0, 0.0, 0.0};
    }
    case ModelKind::Logistic: {
      const double shift = x - t[2];
      const double s = sigmoid(t[1] * shift);
      const double w = s * (1.0 - s);
      const double one_minus_2s = 1.0 - 2.0 * s;
      return {t[1] * w, t[0] * w * (1.0 + t[1] * shift * one_minus_2s),
              -t[0] * t[1] * t[1] * w * one_minus_2s, 0.0};
    }
    case ModelKind::MitscherlichShifted: {
      const double shift = x - t[2];
      const double decay = std::exp(-t[1] * shift);
      return {t[1] * decay, t[0] * decay * (1.0 - t[1] * shift),
              t[0] * t[1] * t[1] * decay};
    }
  }
  return {};
}

ParamVector hessian_x_params(ModelKind kind, const ParamVector& t, double x) {
  validate_params(kind, t);
  switch (kind) {
    case ModelKind::Mitscherlich: {
      const double decay = std::exp(-t[1] * x);
      return {-t[1] * t[1] * decay, -t[0] * t[1] * decay * (2.0 - t[1] * x),
              0.0};
    }
    case ModelKind::MichaelisMenten: {
      const double denom = t[1] + x;
      const double d4 = denom * denom * denom * denom;
      return {-2.0 * t[1] / (denom * denom * denom),
              -2.0 * t[0] * (x - 2.0 * t[1]) / d4, 0.0};
    }
    case ModelKind::QuadraticPlateau: {
      if (x <= t[3]) return {0.0, 0.0, 2.0, 0.0};
      return {0.0, 0.0, 0.0, 0.0};
    }
    case ModelKind::Logistic: {
      const double shift = x - t[2];
      const double s = sigmoid(t[1] * shift);
      const double w = s * (1.0 - s);
      // g(s) = s(1-s)(1-2s), g'(s) = 1 - 6s + 6s^2
      const double g = w * (1.0 - 2.0 * s);
      const double gp = 1.0 - 6.0 * s + 6.0 * s * s;
      return {t[1] * t[1] * g,
              t[0] * t[1] * (2.0 * g + t[1] * shift * w * gp),
              -t[0] * t[1] * t[1] * t[1] * w * gp, 0.0};
    }
    case ModelKind::MitscherlichShifted: {
      const double shift = x - t[2];
      const double decay = std::exp(-t[1] * shift);
      return {-t[1] * t[1] * decay,
              -t[0] * t[1] * decay * (2.0 - t[1] * shift),
              -t[0] * t[1] * t[1] * t[1] * decay};
    }
  }
  return {};
}

double profit(ModelKind kind, const ParamVector& theta,
              const EconomicParams& econ, double x) {
  validate_params(kind, theta);
  validate_econ(econ);
  return profit_raw(kind, theta, econ, x);
}

double closed_form_optimum(ModelKind kind, const ParamVector& t,
                           const EconomicParams& econ, double x_min,
                           double x_max) {
  validate_params(kind, t);
  validate_econ(econ);
  if (!(x_min <= x_max)) {
    throw std::domain_error("closed_form_optimum: x_min must be <= x_max");
  }
  const auto clamp = [&](double v) { return std::clamp(v, x_min, x_max); };
  const double py = econ.yield_price;
  const double px = econ.input_price;
  switch (kind) {
    case ModelKind::Mitscherlich:
    case ModelKind::MitscherlichShifted: {
      if (px == 0.0) return x_max;  // strictly increasing yield, free input
      const double ratio = px / (py * t[0] * t[1]);
      const double shift = kind == ModelKind::MitscherlichShifted ? t[2] : 0.0;
      if (kind == ModelKind::Mitscherlich && ratio >= 1.0) return clamp(0.0);
      return clamp(shift - std::log(ratio) / t[1]);
    }
    case ModelKind::MichaelisMenten: {
      if (px == 0.0) return x_max;
      const double root = std::sqrt(t[0] * t[1] * py / px) - t[1];
      return clamp(std::max(0.0, root));
    }
    case ModelKind::QuadraticPlateau: {
      const double interior = (px / py - t[1]) / (2.0 * t[2]);
      return clamp(std::min(t[3], std::max(0.0, interior)));
    }
    case ModelKind::Logistic: {
      if (px == 0.0) return x_max;
      const double gamma = t[1] * py * t[0] / px;
      const double disc = (gamma - 2.0) * (gamma - 2.0) - 4.0;
      if (disc < 0.0) return dense_profit_search(kind, t, econ, x_min, x_max);
      const double u = (gamma - 2.0 - std::sqrt(disc)) / 2.0;
      if (u <= 0.0) return dense_profit_search(kind, t, econ, x_min, x_max);
      return clamp(t[2] - std::log(u) / t[1]);
    }
  }
  return x_min;
}

std::size_t best_grid_arm(ModelKind kind, const ParamVector& theta,
                          const EconomicParams& econ, const ArmGrid& grid) {
  validate_params(kind, theta);
  validate_econ(econ);
  std::size_t best = 0;
  double best_p = profit_raw(kind, theta, econ, grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double p = profit_raw(kind, theta, econ, grid[i]);
    if (p > best_p) {
      best_p = p;
      best = i;
    }
  }
  return best;
}

}  // namespace fertbandit
