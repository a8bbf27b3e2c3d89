#pragma once

#include <string>
#include <vector>

#include "fertbandit/config.hpp"
#include "fertbandit/environment.hpp"
#include "fertbandit/policies.hpp"

namespace fertbandit {

struct RoundLog {
  int round = 0;  // 1-based
  double arm = 0.0;
  double yield = 0.0;
  double profit_realized = 0.0;
  double profit_expected = 0.0;  // noise-free
  double regret_inst = 0.0;
  double regret_cum = 0.0;
  bool explored = false;
  ParamVector theta;  // estimate after the round; empty when none exists
};

// One replicate of one (policy, price) cell.
struct RunRecord {
  std::string policy;
  double input_price = 0.0;
  int replicate = 0;
  std::vector<RoundLog> rounds;
  int fit_failures = 0;  // rounds where the policy fell back
};

struct DistStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};
DistStats summarize(std::vector<double> values);

struct CheckpointStats {
  int round = 0;
  DistStats regret;       // cumulative regret at the checkpoint
  DistStats avg_profit;   // realized profit averaged over rounds 1..checkpoint
};

struct CellSummary {
  std::string policy;
  double input_price = 0.0;
  std::vector<CheckpointStats> checkpoints;
  // arm_props[t][a]: share of pulls landing on grid arm a within rounds
  // 1..t+1, pooled over replicates; each row sums to one.
  std::vector<std::vector<double>> arm_props;
  // theta_mean[t][j]: replicate mean of the parameter snapshot.
  std::vector<std::vector<double>> theta_mean;
  double mean_final_regret = 0.0;
  double mean_final_avg_profit = 0.0;
};

struct AggregateSummary {
  int horizon = 0;
  std::vector<double> grid_rates;
  std::vector<CellSummary> cells;
};

// Checkpoints {T/3, 2T/3, T} (rounded), deduplicated.
std::vector<int> checkpoint_rounds(int horizon);

// Runs the select -> pull -> update loop for one replicate with seed
// base_seed + replicate_index. The curvature policy probes the environment
// around the played arm each round; probe pulls only enter the record and
// the bandit's data when count_probes is set.
RunRecord run_replicate(const ExperimentConfig& config, PolicyKind policy,
                        double input_price, int replicate_index);

// Groups records by (policy, price) and reduces them; all records must have
// equal length.
AggregateSummary aggregate(const std::vector<RunRecord>& records);

// Writes runs.csv, summary.json and the SVG charts into out_dir. Refuses to
// write anything for an empty record set.
void emit_outputs(const AggregateSummary& summary,
                  const std::vector<RunRecord>& records,
                  const std::string& out_dir);

struct ExperimentResult {
  AggregateSummary summary;
  std::vector<RunRecord> records;
};

// Every (policy, price, replicate) cell, optionally in parallel; the result
// is identical for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace fertbandit
