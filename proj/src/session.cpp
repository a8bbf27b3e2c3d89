#include "fertbandit/session.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fertbandit/estimation.hpp"

namespace fertbandit {

namespace {

using ordered_json = nlohmann::ordered_json;

// Stream ids: 0 fixes the burn-in permutation; per-round selection streams
// start at 100 so adding rounds never disturbs the permutation.
constexpr std::uint32_t kBurnOrderStream = 0;
constexpr std::uint32_t kRoundStreamBase = 100;

PolicyConfig session_policy_config(const SessionState& state) {
  PolicyConfig config;
  config.kind = state.policy;
  config.fitted_model = state.fitted_kind;
  config.alpha = state.alpha;
  config.epsilon_exponent = state.epsilon_exponent;
  config.k = state.k;
  config.burn_in = state.burn_in;
  config.theta_init = state.theta_init;
  return config;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SessionError("cannot write temp file '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out) throw SessionError("write failed for temp file '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw SessionError("cannot replace state file '" + path + "'");
  }
}

SessionState session_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SessionError("cannot read state file '" + path + "'");
  ordered_json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw SessionError("state file '" + path + "' is not valid JSON: " +
                       e.what());
  }
  SessionState state;
  try {
    state.version = doc.at("version").get<int>();
    state.seed = doc.at("seed").get<std::uint64_t>();
    const auto policy = policy_from_name(doc.at("policy").get<std::string>());
    if (!policy) throw SessionError("state file names an unknown policy");
    state.policy = *policy;
    const auto kind =
        model_from_name(doc.at("fitted_kind").get<std::string>());
    if (!kind) throw SessionError("state file names an unknown model");
    state.fitted_kind = *kind;
    state.theta_init = doc.at("theta_init").get<ParamVector>();
    state.alpha = doc.at("alpha").get<double>();
    state.epsilon_exponent = doc.at("epsilon_exponent").get<double>();
    state.k = doc.at("k").get<int>();
    state.burn_in = doc.at("burn_in").get<int>();
    state.econ.yield_price = doc.at("p_y").get<double>();
    state.econ.input_price = doc.at("p_x").get<double>();
    state.grid_rates = doc.at("grid").get<std::vector<double>>();
    for (const auto& row : doc.at("history")) {
      state.history.push_back({row.at("rate").get<double>(),
                               row.at("yield").get<double>(),
                               row.at("profit").get<double>()});
    }
    if (!doc.at("pending").is_null()) {
      const auto& p = doc.at("pending");
      PendingRecommendation rec;
      rec.arm_index = p.at("arm_index").get<std::size_t>();
      rec.rate = p.at("rate").get<double>();
      rec.burn_in = p.at("burn_in").get<bool>();
      rec.explored = p.at("explored").get<bool>();
      rec.has_scores = p.at("has_scores").get<bool>();
      if (rec.has_scores) {
        rec.profit_estimate = p.at("profit_estimate").get<double>();
        rec.uncertainty = p.at("uncertainty").get<double>();
        rec.alpha = p.at("alpha").get<double>();
        rec.score = p.at("score").get<double>();
      }
      state.pending = rec;
    }
  } catch (const SessionError&) {
    throw;
  } catch (const std::exception& e) {
    throw SessionError("state file '" + path + "' is malformed: " + e.what());
  }
  validate_params(state.fitted_kind, state.theta_init);
  validate_econ(state.econ);
  ArmGrid grid(state.grid_rates);
  (void)grid;
  return state;
}

void session_save(const SessionState& state, const std::string& path) {
  ordered_json doc;
  doc["version"] = state.version;
  doc["seed"] = state.seed;
  doc["policy"] = std::string(policy_name(state.policy));
  doc["fitted_kind"] = std::string(model_name(state.fitted_kind));
  doc["theta_init"] = state.theta_init;
  doc["alpha"] = state.alpha;
  doc["epsilon_exponent"] = state.epsilon_exponent;
  doc["k"] = state.k;
  doc["burn_in"] = state.burn_in;
  doc["p_y"] = state.econ.yield_price;
  doc["p_x"] = state.econ.input_price;
  doc["grid"] = state.grid_rates;
  doc["history"] = ordered_json::array();
  for (const auto& obs : state.history) {
    doc["history"].push_back(ordered_json{
        {"rate", obs.rate}, {"yield", obs.yield}, {"profit", obs.profit}});
  }
  if (state.pending) {
    const auto& rec = *state.pending;
    ordered_json p{{"arm_index", rec.arm_index},
                   {"rate", rec.rate},
                   {"burn_in", rec.burn_in},
                   {"explored", rec.explored},
                   {"has_scores", rec.has_scores}};
    if (rec.has_scores) {
      p["profit_estimate"] = rec.profit_estimate;
      p["uncertainty"] = rec.uncertainty;
      p["alpha"] = rec.alpha;
      p["score"] = rec.score;
    }
    doc["pending"] = p;
  } else {
    doc["pending"] = nullptr;
  }
  write_file_atomic(path, doc.dump(2) + "\n");
}

PendingRecommendation session_next(SessionState& state) {
  if (state.pending) {
    throw SessionError(
        "a recommendation is already pending; record it with 'observe' "
        "first");
  }
  const ArmGrid grid(state.grid_rates);
  const PolicyConfig config = session_policy_config(state);

  PolicyState ps;
  ps.round = static_cast<int>(state.history.size());
  ps.history = state.history;
  ps.rng = RngStream(state.seed,
                     kRoundStreamBase + static_cast<std::uint32_t>(ps.round));
  ps.burn_order = RngStream(state.seed, kBurnOrderStream)
                      .permutation(grid.size());

  // The greedy curvature policy has no field probes here; fall back to a
  // plain least-squares fit of the history.
  if (state.policy == PolicyKind::Violin && !ps.history.empty()) {
    FitResult fit = fit_nls(state.fitted_kind, ps.history, state.theta_init);
    if (fit.converged) ps.last_fit = std::move(fit);
  }

  const std::size_t arm_index = select_arm(ps, config, grid, state.econ);

  PendingRecommendation rec;
  rec.arm_index = arm_index;
  rec.rate = grid[arm_index];
  const int burn =
      config.burn_in >= 0 ? config.burn_in : static_cast<int>(grid.size());
  rec.burn_in = (state.policy == PolicyKind::EpsGreedy ||
                 state.policy == PolicyKind::ModelUcb) &&
                ps.round < burn;
  rec.explored = ps.last_explored;
  if (ps.last_fit) {
    const auto scores =
        model_ucb_scores(*ps.last_fit, config, grid, state.econ);
    rec.profit_estimate = scores[arm_index].profit_estimate;
    rec.uncertainty = scores[arm_index].uncertainty;
    rec.alpha = config.alpha;
    rec.score = scores[arm_index].score;
    rec.has_scores = true;
  }
  state.pending = rec;
  return rec;
}

Observation session_observe(SessionState& state, double yield_value) {
  if (!state.pending) {
    throw SessionError(
        "no recommendation is pending; ask for one with 'next' first");
  }
  if (!std::isfinite(yield_value)) {
    throw SessionError("observed yield must be a finite number");
  }
  Observation obs;
  obs.rate = state.pending->rate;
  obs.yield = yield_value;
  obs.profit = state.econ.yield_price * yield_value -
               state.econ.input_price * obs.rate;
  state.history.push_back(obs);
  state.pending.reset();
  return obs;
}

std::string session_status_text(const SessionState& state) {
  std::ostringstream out;
  out << "policy: " << policy_name(state.policy)
      << "   model: " << model_name(state.fitted_kind)
      << "   p_y: " << state.econ.yield_price
      << "   p_x: " << state.econ.input_price << "\n";
  out << "rounds observed: " << state.history.size() << "\n";
  if (state.pending) {
    out << "pending recommendation: " << state.pending->rate << " lb N/ac\n";
  }
  if (!state.history.empty()) {
    out << "history (rate, yield, profit):\n";
    char line[96];
    for (std::size_t i = 0; i < state.history.size(); ++i) {
      const auto& obs = state.history[i];
      std::snprintf(line, sizeof(line), "  %3zu  %8.2f  %10.3f  %10.2f\n",
                    i + 1, obs.rate, obs.yield, obs.profit);
      out << line;
    }
    FitResult fit =
        fit_nls(state.fitted_kind, state.history, state.theta_init);
    const auto& names = param_names(state.fitted_kind);
    if (fit.converged) {
      out << "fitted parameters:\n";
      for (std::size_t j = 0; j < fit.theta_hat.size(); ++j) {
        out << "  " << names[j] << " = " << fit.theta_hat[j] << "\n";
      }
      const ArmGrid grid(state.grid_rates);
      const double x_star =
          closed_form_optimum(state.fitted_kind, fit.theta_hat, state.econ,
                              grid.min_rate(), grid.max_rate());
      out << "continuous profit-maximizing rate: " << x_star << " lb N/ac\n";
    } else {
      out << "not enough distinct rates to fit yet; starting values:\n";
      for (std::size_t j = 0; j < state.theta_init.size(); ++j) {
        out << "  " << names[j] << " = " << state.theta_init[j] << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace fertbandit
