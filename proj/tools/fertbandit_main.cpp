// Command-line front end: batch experiment runs from a config file, plus a
// persistent season-by-season advisory session.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fertbandit/config.hpp"
#include "fertbandit/harness.hpp"
#include "fertbandit/session.hpp"

namespace {

using namespace fertbandit;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<long long> seed;
};

struct AdviseArgs {
  std::string state_path = "advisor_state.json";
  // init
  std::string model;
  std::vector<double> grid;
  double p_y = 5.0;
  double p_x = 0.5;
  std::vector<double> theta_init;
  std::string policy = "model_ucb";
  double alpha = 1.0;
  double epsilon_exponent = 1.5;
  int k = 3;
  int burn_in = -1;
  unsigned long long seed = 0;
  // observe
  double yield_value = 0.0;
};

int cmd_run(const RunArgs& args) {
  ExperimentConfig config = load_config(args.config_path);
  for (const auto& item : args.overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + item + "'");
    }
    apply_override(config, item.substr(0, eq), item.substr(eq + 1));
  }
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.seed) config.base_seed = static_cast<std::uint64_t>(*args.seed);
  finalize_config(config);

  ExperimentResult result = run_experiment(config);
  emit_outputs(result.summary, result.records, config.out_dir);

  std::printf("%-12s %6s %18s %18s\n", "policy", "p_x", "mean_cum_regret",
              "mean_avg_profit");
  for (const auto& cell : result.summary.cells) {
    std::printf("%-12s %6.2f %18.2f %18.2f\n", cell.policy.c_str(),
                cell.input_price, cell.mean_final_regret,
                cell.mean_final_avg_profit);
  }
  std::printf("outputs written to %s\n", config.out_dir.c_str());
  return kExitOk;
}

int cmd_advise_init(const AdviseArgs& args) {
  SessionState state;
  const auto kind = model_from_name(args.model);
  if (!kind) throw ConfigError("unknown model '" + args.model + "'");
  const auto policy = policy_from_name(args.policy);
  if (!policy) throw ConfigError("unknown policy '" + args.policy + "'");
  state.fitted_kind = *kind;
  state.policy = *policy;
  state.theta_init = args.theta_init.empty()
                         ? default_initial_params(*kind)
                         : args.theta_init;
  state.alpha = args.alpha;
  state.epsilon_exponent = args.epsilon_exponent;
  state.k = args.k;
  state.burn_in = args.burn_in;
  state.econ = {args.p_y, args.p_x};
  state.grid_rates = args.grid;
  state.seed = args.seed;
  try {
    validate_params(state.fitted_kind, state.theta_init);
    validate_econ(state.econ);
    ArmGrid grid(state.grid_rates);
    (void)grid;
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  session_save(state, args.state_path);
  std::printf("session initialized in %s (%zu arms, %s)\n",
              args.state_path.c_str(), state.grid_rates.size(),
              args.model.c_str());
  return kExitOk;
}

int cmd_advise_next(const AdviseArgs& args) {
  SessionState state = session_load(args.state_path);
  const PendingRecommendation rec = session_next(state);
  session_save(state, args.state_path);
  std::printf("round %zu: recommend %.6g lb N/ac\n", state.history.size() + 1,
              rec.rate);
  if (rec.burn_in) {
    std::printf("  phase: burn-in (each rate tried once before fitting)\n");
  } else if (rec.explored) {
    std::printf("  phase: exploration\n");
  }
  if (rec.has_scores) {
    std::printf("  profit estimate: %.4f\n", rec.profit_estimate);
    std::printf("  uncertainty:     %.4f\n", rec.uncertainty);
    std::printf("  alpha:           %.4f\n", rec.alpha);
    std::printf("  ucb score:       %.4f\n", rec.score);
  }
  std::printf("record the harvested yield with: advise observe <yield>\n");
  return kExitOk;
}

int cmd_advise_observe(const AdviseArgs& args) {
  SessionState state = session_load(args.state_path);
  const Observation obs = session_observe(state, args.yield_value);
  session_save(state, args.state_path);
  std::printf("recorded: rate %.6g lb N/ac, yield %.6g bu/ac, profit %.2f\n",
              obs.rate, obs.yield, obs.profit);
  return kExitOk;
}

int cmd_advise_status(const AdviseArgs& args) {
  SessionState state = session_load(args.state_path);
  std::fputs(session_status_text(state).c_str(), stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based bandit simulator and advisor for fertilizer-rate "
               "selection"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run a simulation experiment");
  run->add_option("config", run_args.config_path, "Config file path")
      ->required();
  run->add_option("--set", run_args.overrides,
                  "Override a config key, e.g. --set T=50");
  run->add_option("--out", run_args.out_dir, "Output directory override");
  run->add_option("--seed", run_args.seed, "Base seed override");

  AdviseArgs advise_args;
  CLI::App* advise =
      app.add_subcommand("advise", "Season-by-season advisory session");
  advise->require_subcommand(1);

  CLI::App* init = advise->add_subcommand("init", "Create a session file");
  init->add_option("--state", advise_args.state_path, "Session file path");
  init->add_option("--model", advise_args.model, "Fitted model family")
      ->required();
  init->add_option("--grid", advise_args.grid,
                   "Candidate rates, comma separated")
      ->required()
      ->delimiter(',');
  init->add_option("--p-y", advise_args.p_y, "Price per unit yield ($/bu)")
      ->required();
  init->add_option("--p-x", advise_args.p_x, "Price per unit input ($/lb N)")
      ->required();
  init->add_option("--theta-init", advise_args.theta_init,
                   "Starting parameter values (defaults per family)")
      ->delimiter(',');
  init->add_option("--policy", advise_args.policy,
                   "eps_greedy|model_ucb|violin|linucb|knn_ucb");
  init->add_option("--alpha", advise_args.alpha, "UCB width");
  init->add_option("--epsilon-exponent", advise_args.epsilon_exponent,
                   "Exploration decay exponent");
  init->add_option("--k", advise_args.k, "Neighbor count for knn_ucb");
  init->add_option("--burn-in", advise_args.burn_in,
                   "Forced initial pulls (-1: policy default)");
  init->add_option("--seed", advise_args.seed, "Session seed");

  CLI::App* next =
      advise->add_subcommand("next", "Recommend the next rate to try");
  next->add_option("--state", advise_args.state_path, "Session file path");

  CLI::App* observe =
      advise->add_subcommand("observe", "Record the observed yield");
  observe->add_option("yield", advise_args.yield_value, "Observed yield (bu/ac)")
      ->required();
  observe->add_option("--state", advise_args.state_path, "Session file path");

  CLI::App* status = advise->add_subcommand("status", "Show session state");
  status->add_option("--state", advise_args.state_path, "Session file path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (init->parsed()) return cmd_advise_init(advise_args);
    if (next->parsed()) return cmd_advise_next(advise_args);
    if (observe->parsed()) return cmd_advise_observe(advise_args);
    if (status->parsed()) return cmd_advise_status(advise_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
