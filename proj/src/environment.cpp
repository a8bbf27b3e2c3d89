#include "fertbandit/environment.hpp"

#include <cmath>
#include <stdexcept>

namespace fertbandit {

Environment::Environment(ModelKind truth_kind, ParamVector truth_theta,
                         double noise_sigma, EconomicParams econ, ArmGrid grid,
                         std::uint64_t seed, NoiseKind noise)
    : truth_kind_(truth_kind),
      truth_theta_(std::move(truth_theta)),
      noise_sigma_(noise_sigma),
      econ_(econ),
      grid_(std::move(grid)),
      noise_(noise),
      reward_stream_(seed, 0),
      probe_stream_(seed, 1) {
  validate_params(truth_kind_, truth_theta_);
  validate_econ(econ_);
  if (!(noise_sigma_ >= 0.0)) {
    throw std::domain_error("environment: noise sigma must be >= 0");
  }
  oracle_arm_ = best_grid_arm(truth_kind_, truth_theta_, econ_, grid_);
  oracle_profit_ = expected_profit(grid_[oracle_arm_]);
}

double Environment::noise_draw(RngStream& stream) {
  switch (noise_) {
    case NoiseKind::Gaussian:
      return stream.normal(0.0, noise_sigma_);
    case NoiseKind::BoundedUniform: {
      // Same standard deviation as the Gaussian option, compact support.
      const double half_width = noise_sigma_ * std::sqrt(3.0);
      return stream.uniform(-half_width, half_width);
    }
  }
  return 0.0;
}

StepOutcome Environment::pull(double rate) {
  if (rate < 0.0) throw std::domain_error("environment: rate must be >= 0");
  const double mean_yield = expected_yield(rate);
  StepOutcome out;
  out.arm = rate;
  out.yield =
      mean_yield + (noise_sigma_ > 0.0 ? noise_draw(reward_stream_) : 0.0);
  out.profit = econ_.yield_price * out.yield - econ_.input_price * rate;
  out.instantaneous_regret = oracle_profit_ - expected_profit(rate);
  return out;
}

double Environment::probe(double x, int m, std::vector<double>* draws) {
  if (x < 0.0) throw std::domain_error("environment: rate must be >= 0");
  if (m < 1) throw std::invalid_argument("environment: probe repeats must be >= 1");
  const double mean_yield = expected_yield(x);
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double y =
        mean_yield + (noise_sigma_ > 0.0 ? noise_draw(probe_stream_) : 0.0);
    if (draws) draws->push_back(y);
    sum += y;
  }
  return sum / static_cast<double>(m);
}

double Environment::expected_yield(double x) const {
  return evaluate(truth_kind_, truth_theta_, x);
}

double Environment::expected_profit(double x) const {
  return econ_.yield_price * expected_yield(x) - econ_.input_price * x;
}

}  // namespace fertbandit
