#include "fertbandit/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fertbandit {

namespace {

std::size_t argmax_lower_tie(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int effective_burn_in(const PolicyConfig& config, const ArmGrid& grid) {
  if (config.burn_in >= 0) return config.burn_in;
  return static_cast<int>(grid.size());
}

void ensure_burn_order(PolicyState& state, const ArmGrid& grid) {
  if (state.burn_order.empty()) {
    state.burn_order = state.rng.permutation(grid.size());
  }
}

std::size_t distinct_rate_count(const History& history) {
  std::vector<double> rates;
  rates.reserve(history.size());
  for (const auto& obs : history) rates.push_back(obs.rate);
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  return rates.size();
}

std::size_t least_played_arm(const History& history, const ArmGrid& grid) {
  std::vector<int> plays(grid.size(), 0);
  for (const auto& obs : history) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (obs.rate == grid[i]) {
        ++plays[i];
        break;
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (plays[i] < plays[best]) best = i;
  }
  return best;
}

std::size_t greedy_profit_arm(ModelKind kind, const ParamVector& theta,
                              const ArmGrid& grid, const EconomicParams& econ) {
  std::vector<double> profits(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    profits[i] = profit(kind, theta, econ, grid[i]);
  }
  return argmax_lower_tie(profits);
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::EpsGreedy:
      return "eps_greedy";
    case PolicyKind::ModelUcb:
      return "model_ucb";
    case PolicyKind::Violin:
      return "violin";
    case PolicyKind::LinUcb:
      return "linucb";
    case PolicyKind::KnnUcb:
      return "knn_ucb";
  }
  return "";
}

std::optional<PolicyKind> policy_from_name(std::string_view name) {
  for (PolicyKind kind : {PolicyKind::EpsGreedy, PolicyKind::ModelUcb,
                          PolicyKind::Violin, PolicyKind::LinUcb,
                          PolicyKind::KnnUcb}) {
    if (name == policy_name(kind)) return kind;
  }
  return std::nullopt;
}

bool epsilon_explore_draw(RngStream& rng, int round, double exponent) {
  const double eps = std::pow(static_cast<double>(round), -exponent);
  return rng.uniform01() < eps;
}

std::vector<ArmScore> model_ucb_scores(const FitResult& fit,
                                       const PolicyConfig& config,
                                       const ArmGrid& grid,
                                       const EconomicParams& econ) {
  std::vector<ArmScore> scores(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ArmScore& s = scores[i];
    s.profit_estimate =
        profit(config.fitted_model, fit.theta_hat, econ, grid[i]);
    s.uncertainty = econ.yield_price *
                    prediction_stderr(fit, config.fitted_model, grid[i]);
    s.score = s.profit_estimate + config.alpha * s.uncertainty;
  }
  return scores;
}

KnnStats knn_neighbor_stats(const History& history, double x, int k) {
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  const std::size_t use =
      std::min<std::size_t>(static_cast<std::size_t>(k), history.size());
  if (use == 0) throw std::invalid_argument("knn: history must be nonempty");
  std::vector<std::size_t> order(history.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Stable sort keeps observation order within equal distances, which is the
  // tie rule: equidistant neighbors enter in the order they were observed.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::abs(history[a].rate - x) <
                            std::abs(history[b].rate - x);
                   });
  double sum = 0.0;
  for (std::size_t i = 0; i < use; ++i) sum += history[order[i]].yield;
  KnnStats stats;
  stats.mean_yield = sum / static_cast<double>(use);
  if (use > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < use; ++i) {
      const double d = history[order[i]].yield - stats.mean_yield;
      ss += d * d;
    }
    stats.stddev = std::sqrt(ss / static_cast<double>(use - 1));
  }
  return stats;
}

std::size_t select_eps_greedy(PolicyState& state, const PolicyConfig& config,
                              const ArmGrid& grid,
                              const EconomicParams& econ) {
  ensure_burn_order(state, grid);
  state.last_fit_failed = false;
  const int burn = effective_burn_in(config, grid);
  if (state.round < burn) {
    state.last_explored = true;
    return state.burn_order[static_cast<std::size_t>(state.round) %
                            grid.size()];
  }
  const int t = state.round + 1;  // global round, burn-in included
  if (epsilon_explore_draw(state.rng, t, config.epsilon_exponent)) {
    state.last_explored = true;
    return state.rng.uniform_index(grid.size());
  }
  FitResult fit = fit_nls(config.fitted_model, state.history,
                          config.theta_init);
  if (!fit.converged) {
    state.last_fit_failed = true;
    state.last_explored = true;
    return state.rng.uniform_index(grid.size());
  }
  state.last_fit = std::move(fit);
  const double x_star =
      closed_form_optimum(config.fitted_model, state.last_fit->theta_hat,
                          econ, grid.min_rate(), grid.max_rate());
  state.last_explored = false;
  return grid.closest_index(x_star);
}

std::size_t select_model_ucb(PolicyState& state, const PolicyConfig& config,
                             const ArmGrid& grid,
                             const EconomicParams& econ) {
  ensure_burn_order(state, grid);
  state.last_fit_failed = false;
  const int burn = effective_burn_in(config, grid);
  if (state.round < burn) {
    state.last_explored = true;
    return state.burn_order[static_cast<std::size_t>(state.round) %
                            grid.size()];
  }
  FitResult fit = fit_nls(config.fitted_model, state.history,
                          config.theta_init);
  if (!fit.converged) {
    state.last_fit_failed = true;
    state.last_explored = true;
    return least_played_arm(state.history, grid);
  }
  state.last_fit = std::move(fit);
  const auto scores = model_ucb_scores(*state.last_fit, config, grid, econ);
  std::vector<double> values(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) values[i] = scores[i].score;
  state.last_explored = false;
  return argmax_lower_tie(values);
}

std::size_t select_violin(PolicyState& state, const PolicyConfig& config,
                          const ArmGrid& grid, const EconomicParams& econ) {
  state.last_fit_failed = false;
  state.last_explored = false;
  const ParamVector& theta =
      state.last_fit ? state.last_fit->theta_hat : config.theta_init;
  return greedy_profit_arm(config.fitted_model, theta, grid, econ);
}

std::size_t select_linucb(PolicyState& state, const PolicyConfig& config,
                          const ArmGrid& grid, const EconomicParams& econ) {
  state.last_fit_failed = false;
  if (distinct_rate_count(state.history) < 2) {
    state.last_explored = true;
    return state.rng.uniform_index(grid.size());
  }
  // Ridge-stabilized least squares of yield on (1, x).
  Eigen::Matrix2d design = 1e-8 * Eigen::Matrix2d::Identity();
  Eigen::Vector2d moment = Eigen::Vector2d::Zero();
  for (const auto& obs : state.history) {
    Eigen::Vector2d phi(1.0, obs.rate);
    design += phi * phi.transpose();
    moment += phi * obs.yield;
  }
  const Eigen::Matrix2d design_inv = design.inverse();
  const Eigen::Vector2d beta = design_inv * moment;
  state.linear_beta = {beta[0], beta[1]};
  std::vector<double> scores(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::Vector2d phi(1.0, grid[i]);
    const double profit_est =
        econ.yield_price * phi.dot(beta) - econ.input_price * grid[i];
    const double width =
        std::sqrt(std::max(0.0, double(phi.dot(design_inv * phi))));
    scores[i] = profit_est + config.alpha * width;
  }
  state.last_explored = false;
  return argmax_lower_tie(scores);
}

std::size_t select_knn_ucb(PolicyState& state, const PolicyConfig& config,
                           const ArmGrid& grid, const EconomicParams& econ) {
  state.last_fit_failed = false;
  if (state.round < config.k) {
    state.last_explored = true;
    return state.rng.uniform_index(grid.size());
  }
  std::vector<double> scores(grid.size());
  const double bonus_scale =
      config.alpha / std::sqrt(static_cast<double>(config.k));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const KnnStats stats = knn_neighbor_stats(state.history, grid[i], config.k);
    scores[i] = econ.yield_price * stats.mean_yield -
                econ.input_price * grid[i] + bonus_scale * stats.stddev;
  }
  state.last_explored = false;
  return argmax_lower_tie(scores);
}

std::size_t select_arm(PolicyState& state, const PolicyConfig& config,
                       const ArmGrid& grid, const EconomicParams& econ) {
  switch (config.kind) {
    case PolicyKind::EpsGreedy:
      return select_eps_greedy(state, config, grid, econ);
    case PolicyKind::ModelUcb:
      return select_model_ucb(state, config, grid, econ);
    case PolicyKind::Violin:
      return select_violin(state, config, grid, econ);
    case PolicyKind::LinUcb:
      return select_linucb(state, config, grid, econ);
    case PolicyKind::KnnUcb:
      return select_knn_ucb(state, config, grid, econ);
  }
  throw std::logic_error("select_arm: unknown policy kind");
}

Bandit::Bandit(PolicyConfig config, ArmGrid grid, EconomicParams econ,
               RngStream rng)
    : config_(std::move(config)), grid_(std::move(grid)), econ_(econ) {
  if (config_.theta_init.empty()) {
    config_.theta_init = default_initial_params(config_.fitted_model);
  }
  validate_params(config_.fitted_model, config_.theta_init);
  validate_econ(econ_);
  state_.rng = rng;
}

std::size_t Bandit::select() {
  return select_arm(state_, config_, grid_, econ_);
}

void Bandit::push_observation(double rate, double yield_value,
                              double profit_value) {
  state_.history.push_back({rate, yield_value, profit_value});
  state_.round += 1;
}

void Bandit::push_curvature_target(const CurvatureTargets& target) {
  targets_.push_back(target);
}

void Bandit::refit_curvature() {
  if (state_.history.empty()) return;
  FitResult fit =
      fit_curvature_matched(config_.fitted_model, state_.history, targets_,
                            config_.alpha1, config_.alpha2, config_.theta_init);
  if (fit.converged) {
    state_.last_fit = std::move(fit);
  } else {
    state_.last_fit_failed = true;
  }
}

ParamVector Bandit::current_theta() const {
  if (state_.last_fit) return state_.last_fit->theta_hat;
  switch (config_.kind) {
    case PolicyKind::EpsGreedy:
    case PolicyKind::ModelUcb:
    case PolicyKind::Violin:
      return config_.theta_init;
    case PolicyKind::LinUcb:
      if (state_.linear_beta) {
        return {(*state_.linear_beta)[0], (*state_.linear_beta)[1]};
      }
      return {};
    case PolicyKind::KnnUcb:
      return {};
  }
  return {};
}

}  // namespace fertbandit
