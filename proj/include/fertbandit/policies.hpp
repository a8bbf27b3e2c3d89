#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "fertbandit/estimation.hpp"
#include "fertbandit/models.hpp"
#include "fertbandit/rng.hpp"

namespace fertbandit {

enum class PolicyKind { EpsGreedy, ModelUcb, Violin, LinUcb, KnnUcb };

std::string_view policy_name(PolicyKind kind);
std::optional<PolicyKind> policy_from_name(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::ModelUcb;
  ModelKind fitted_model = ModelKind::QuadraticPlateau;
  double epsilon_exponent = 1.5;  // eps_t = t^-a
  double alpha = 1.0;             // UCB width
  double alpha1 = 2.0;            // gradient-matching weight
  double alpha2 = 640.0;          // curvature-matching weight
  int k = 3;                      // kNN neighbor count
  ParamVector theta_init;
  // Forced initial pulls; -1 selects the policy default (one pull per arm
  // for eps-greedy and model UCB, none for the greedy curvature policy).
  int burn_in = -1;
};

struct PolicyState {
  int round = 0;  // arms played so far; equals history.size()
  History history;
  std::optional<FitResult> last_fit;
  RngStream rng;
  // Seeded once, then indexed by round during burn-in.
  std::vector<std::size_t> burn_order;
  std::optional<std::array<double, 2>> linear_beta;  // last (intercept, slope)
  bool last_explored = false;
  bool last_fit_failed = false;
};

// The exploration coin for decayed eps-greedy at global round t (1-based).
bool epsilon_explore_draw(RngStream& rng, int round, double exponent);

// Per-arm UCB decomposition: profit estimate, price-scaled prediction
// standard error, and the combined score.
struct ArmScore {
  double profit_estimate = 0.0;
  double uncertainty = 0.0;
  double score = 0.0;
};
std::vector<ArmScore> model_ucb_scores(const FitResult& fit,
                                       const PolicyConfig& config,
                                       const ArmGrid& grid,
                                       const EconomicParams& econ);

// Mean and sample standard deviation over the k observations nearest to x
// (distance ties resolved by observation order).
struct KnnStats {
  double mean_yield = 0.0;
  double stddev = 0.0;
};
KnnStats knn_neighbor_stats(const History& history, double x, int k);

std::size_t select_eps_greedy(PolicyState& state, const PolicyConfig& config,
                              const ArmGrid& grid, const EconomicParams& econ);
std::size_t select_model_ucb(PolicyState& state, const PolicyConfig& config,
                             const ArmGrid& grid, const EconomicParams& econ);
std::size_t select_violin(PolicyState& state, const PolicyConfig& config,
                          const ArmGrid& grid, const EconomicParams& econ);
std::size_t select_linucb(PolicyState& state, const PolicyConfig& config,
                          const ArmGrid& grid, const EconomicParams& econ);
std::size_t select_knn_ucb(PolicyState& state, const PolicyConfig& config,
                           const ArmGrid& grid, const EconomicParams& econ);

// Dispatch on config.kind.
std::size_t select_arm(PolicyState& state, const PolicyConfig& config,
                       const ArmGrid& grid, const EconomicParams& econ);

// Stateful wrapper running one policy instance: select, record the outcome,
// and (for the curvature-matched policy) refit against accumulated
// derivative targets. One instance per replicate; not thread-shared.
class Bandit {
 public:
  Bandit(PolicyConfig config, ArmGrid grid, EconomicParams econ,
         RngStream rng);

  std::size_t select();
  void push_observation(double rate, double yield_value, double profit_value);
  void push_curvature_target(const CurvatureTargets& target);
  // Cold refit of the curvature-matched objective over everything seen so
  // far; a failed fit keeps the previous estimate.
  void refit_curvature();

  bool last_explored() const { return state_.last_explored; }
  bool last_fit_failed() const { return state_.last_fit_failed; }
  // Current parameter snapshot: fitted theta if available, the starting
  // values for model-based policies, the linear coefficients for LinUCB,
  // empty otherwise.
  ParamVector current_theta() const;

  const PolicyState& state() const { return state_; }
  const PolicyConfig& config() const { return config_; }
  const ArmGrid& grid() const { return grid_; }
  const std::vector<CurvatureTargets>& curvature_targets() const {
    return targets_;
  }

 private:
  PolicyConfig config_;
  ArmGrid grid_;
  EconomicParams econ_;
  PolicyState state_;
  std::vector<CurvatureTargets> targets_;
};

}  // namespace fertbandit
