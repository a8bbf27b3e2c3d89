#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fertbandit/models.hpp"
#include "fertbandit/policies.hpp"

namespace fertbandit {

// A recommendation waiting for its observed yield.
struct PendingRecommendation {
  std::size_t arm_index = 0;
  double rate = 0.0;
  bool burn_in = false;
  bool explored = false;
  // UCB breakdown when a fit backed the choice; NaN otherwise.
  double profit_estimate = 0.0;
  double uncertainty = 0.0;
  double alpha = 0.0;
  double score = 0.0;
  bool has_scores = false;
};

// Season-by-season advisory state, persisted as a JSON document so entered
// yields stay auditable. Strict alternation: `next` issues a recommendation,
// `observe` resolves it.
struct SessionState {
  int version = 1;
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::ModelUcb;
  ModelKind fitted_kind = ModelKind::QuadraticPlateau;
  ParamVector theta_init;
  double alpha = 1.0;
  double epsilon_exponent = 1.5;
  int k = 3;
  int burn_in = -1;
  EconomicParams econ;
  std::vector<double> grid_rates;
  History history;
  std::optional<PendingRecommendation> pending;
};

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SessionState session_load(const std::string& path);

// Write-temp-then-rename so a crash never leaves a torn state file.
void session_save(const SessionState& state, const std::string& path);
void write_file_atomic(const std::string& path, const std::string& contents);

// Computes the next recommendation and marks it pending. Recommendations
// are a pure function of (seed, history): the burn-in permutation and any
// exploration draw are reseeded per round, never carried across processes.
PendingRecommendation session_next(SessionState& state);

// Resolves the pending recommendation with the observed yield; returns the
// appended observation.
Observation session_observe(SessionState& state, double yield_value);

std::string session_status_text(const SessionState& state);

}  // namespace fertbandit
