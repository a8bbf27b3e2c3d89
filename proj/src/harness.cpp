#include "fertbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "fertbandit/svg.hpp"

namespace fertbandit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string theta_to_json(const ParamVector& theta) {
  std::string out = "[";
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(theta[i]);
  }
  out += ']';
  return out;
}

// Stream id 2 feeds the policy; 0 and 1 belong to the environment.
constexpr std::uint32_t kPolicyStream = 2;

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

struct CellKey {
  std::string policy;
  double input_price;
  bool operator==(const CellKey& other) const {
    return policy == other.policy && input_price == other.input_price;
  }
};

void append_round(RunRecord& record, double& regret_cum, int round_no,
                  double rate, double yield_value, double profit_realized,
                  double profit_expected, double regret_inst, bool explored) {
  regret_cum += regret_inst;
  RoundLog log;
  log.round = round_no;
  log.arm = rate;
  log.yield = yield_value;
  log.profit_realized = profit_realized;
  log.profit_expected = profit_expected;
  log.regret_inst = regret_inst;
  log.regret_cum = regret_cum;
  log.explored = explored;
  record.rounds.push_back(std::move(log));
}

}  // namespace

DistStats summarize(std::vector<double> values) {
  DistStats stats;
  if (values.empty()) return stats;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  stats.median = interpolated_quantile(values, 0.5);
  stats.q1 = interpolated_quantile(values, 0.25);
  stats.q3 = interpolated_quantile(values, 0.75);
  stats.min = values.front();
  stats.max = values.back();
  return stats;
}

std::vector<int> checkpoint_rounds(int horizon) {
  std::vector<int> rounds;
  for (double frac : {1.0 / 3.0, 2.0 / 3.0, 1.0}) {
    int r = static_cast<int>(std::lround(frac * horizon));
    r = std::clamp(r, 1, horizon);
    if (rounds.empty() || rounds.back() != r) rounds.push_back(r);
  }
  return rounds;
}

RunRecord run_replicate(const ExperimentConfig& config, PolicyKind policy,
                        double input_price, int replicate_index) {
  const std::uint64_t seed =
      config.base_seed + static_cast<std::uint64_t>(replicate_index);
  const EconomicParams econ{config.yield_price, input_price};
  ArmGrid grid(config.grid_rates);
  Environment env(config.truth_kind, config.truth_theta, config.sigma, econ,
                  grid, seed, config.noise);
  Bandit bandit(make_policy_config(config, policy), grid, econ,
                RngStream(seed, kPolicyStream));

  RunRecord record;
  record.policy = std::string(policy_name(policy));
  record.input_price = input_price;
  record.replicate = replicate_index;

  const double oracle_profit = env.oracle().second;
  double regret_cum = 0.0;
  while (static_cast<int>(record.rounds.size()) < config.horizon) {
    const std::size_t iteration_start = record.rounds.size();
    const std::size_t arm_index = bandit.select();
    const double rate = grid[arm_index];
    const StepOutcome out = env.pull(rate);
    bandit.push_observation(rate, out.yield, out.profit);
    append_round(record, regret_cum,
                 static_cast<int>(record.rounds.size()) + 1, rate, out.yield,
                 out.profit, env.expected_profit(rate),
                 out.instantaneous_regret, bandit.last_explored());

    if (policy == PolicyKind::Violin) {
      // Probe around the played arm; shift the stencil right when the arm
      // sits at the domain edge so probed rates stay nonnegative.
      const double center = std::max(rate, config.probe_step);
      auto probe_fn = [&](double x, int m) {
        std::vector<double> draws;
        const double mean = env.probe(x, m, &draws);
        if (config.count_probes) {
          for (double y : draws) {
            const double expected = env.expected_profit(x);
            append_round(record, regret_cum,
                         static_cast<int>(record.rounds.size()) + 1, x, y,
                         econ.yield_price * y - econ.input_price * x, expected,
                         oracle_profit - expected, true);
            bandit.push_observation(
                x, y, econ.yield_price * y - econ.input_price * x);
          }
        }
        return mean;
      };
      bandit.push_curvature_target(estimate_curvature(
          probe_fn, center, config.probe_step, config.probe_repeats));
      bandit.refit_curvature();
    }

    if (bandit.last_fit_failed()) record.fit_failures += 1;
    const ParamVector snapshot = bandit.current_theta();
    for (std::size_t i = iteration_start; i < record.rounds.size(); ++i) {
      record.rounds[i].theta = snapshot;
    }
  }
  if (static_cast<int>(record.rounds.size()) > config.horizon) {
    record.rounds.resize(static_cast<std::size_t>(config.horizon));
  }
  return record;
}

AggregateSummary aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("aggregate: record set must be nonempty");
  }
  const std::size_t horizon = records.front().rounds.size();
  for (const auto& record : records) {
    if (record.rounds.size() != horizon) {
      throw std::invalid_argument("aggregate: records differ in length");
    }
  }

  // Group while preserving first-seen cell order.
  std::vector<CellKey> keys;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const auto& record : records) {
    const CellKey key{record.policy, record.input_price};
    std::size_t slot = keys.size();
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == key) {
        slot = i;
        break;
      }
    }
    if (slot == keys.size()) {
      keys.push_back(key);
      groups.emplace_back();
    }
    groups[slot].push_back(&record);
  }

  // Arm proportions bucket by the nearest grid rate so that off-grid probe
  // rounds (count_probes mode) still land in a column.
  std::vector<double> grid_rates;
  for (const auto& record : records) {
    for (const auto& log : record.rounds) {
      if (std::find(grid_rates.begin(), grid_rates.end(), log.arm) ==
          grid_rates.end()) {
        grid_rates.push_back(log.arm);
      }
    }
  }
  std::sort(grid_rates.begin(), grid_rates.end());
  ArmGrid grid(grid_rates);

  AggregateSummary summary;
  summary.horizon = static_cast<int>(horizon);
  summary.grid_rates = grid_rates;
  const std::vector<int> checkpoints =
      checkpoint_rounds(static_cast<int>(horizon));

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& group = groups[gi];
    CellSummary cell;
    cell.policy = keys[gi].policy;
    cell.input_price = keys[gi].input_price;

    for (int checkpoint : checkpoints) {
      CheckpointStats cs;
      cs.round = checkpoint;
      std::vector<double> regrets;
      std::vector<double> profits;
      for (const RunRecord* record : group) {
        const auto idx = static_cast<std::size_t>(checkpoint - 1);
        regrets.push_back(record->rounds[idx].regret_cum);
        double sum = 0.0;
        for (int t = 0; t < checkpoint; ++t) {
          sum += record->rounds[static_cast<std::size_t>(t)].profit_realized;
        }
        profits.push_back(sum / checkpoint);
      }
      cs.regret = summarize(regrets);
      cs.avg_profit = summarize(profits);
      cell.checkpoints.push_back(cs);
    }
    cell.mean_final_regret = cell.checkpoints.back().regret.mean;
    cell.mean_final_avg_profit = cell.checkpoints.back().avg_profit.mean;

    cell.arm_props.assign(horizon,
                          std::vector<double>(grid.size(), 0.0));
    std::vector<double> counts(grid.size(), 0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      for (const RunRecord* record : group) {
        counts[grid.closest_index(record->rounds[t].arm)] += 1.0;
      }
      const double total = static_cast<double>((t + 1) * group.size());
      for (std::size_t a = 0; a < grid.size(); ++a) {
        cell.arm_props[t][a] = counts[a] / total;
      }
    }

    // Snapshot dimension: warmup rounds may carry no estimate yet, so take
    // the widest snapshot seen and average only over actual contributions.
    std::size_t theta_dim = 0;
    for (const RunRecord* record : group) {
      for (const auto& log : record->rounds) {
        theta_dim = std::max(theta_dim, log.theta.size());
      }
    }
    cell.theta_mean.assign(horizon, std::vector<double>(theta_dim, 0.0));
    for (std::size_t t = 0; t < horizon; ++t) {
      std::vector<int> contributions(theta_dim, 0);
      for (const RunRecord* record : group) {
        const auto& theta = record->rounds[t].theta;
        for (std::size_t j = 0; j < theta.size(); ++j) {
          cell.theta_mean[t][j] += theta[j];
          contributions[j] += 1;
        }
      }
      for (std::size_t j = 0; j < theta_dim; ++j) {
        if (contributions[j] > 0) cell.theta_mean[t][j] /= contributions[j];
      }
    }

    summary.cells.push_back(std::move(cell));
  }
  return summary;
}

namespace {

void write_runs_csv(const std::string& path,
                    const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "policy,p_x,replicate,round,arm,yield,profit_realized,"
         "profit_expected,regret_inst,regret_cum,explored,theta_json\n";
  for (const auto& record : records) {
    for (const auto& log : record.rounds) {
      out << record.policy << ',' << format_double(record.input_price) << ','
          << record.replicate << ',' << log.round << ','
          << format_double(log.arm) << ',' << format_double(log.yield) << ','
          << format_double(log.profit_realized) << ','
          << format_double(log.profit_expected) << ','
          << format_double(log.regret_inst) << ','
          << format_double(log.regret_cum) << ',' << (log.explored ? 1 : 0)
          << ',' << '"' << theta_to_json(log.theta) << '"' << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ordered_json stats_to_json(const DistStats& stats) {
  return ordered_json{{"mean", stats.mean}, {"median", stats.median},
                      {"q1", stats.q1},     {"q3", stats.q3},
                      {"min", stats.min},   {"max", stats.max}};
}

void write_summary_json(const std::string& path,
                        const AggregateSummary& summary) {
  ordered_json root;
  for (const auto& cell : summary.cells) {
    ordered_json checkpoints = ordered_json::array();
    for (const auto& cs : cell.checkpoints) {
      checkpoints.push_back(ordered_json{{"round", cs.round},
                                         {"regret", stats_to_json(cs.regret)},
                                         {"avg_profit",
                                          stats_to_json(cs.avg_profit)}});
    }
    root[cell.policy][format_double(cell.input_price)] =
        ordered_json{{"checkpoints", checkpoints},
                     {"arm_props", cell.arm_props},
                     {"theta_mean", cell.theta_mean}};
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << root.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<double> collect_prices(const AggregateSummary& summary) {
  std::vector<double> prices;
  for (const auto& cell : summary.cells) {
    if (std::find(prices.begin(), prices.end(), cell.input_price) ==
        prices.end()) {
      prices.push_back(cell.input_price);
    }
  }
  return prices;
}

void write_charts(const AggregateSummary& summary,
                  const std::vector<RunRecord>& records,
                  const std::filesystem::path& dir) {
  const int horizon = summary.horizon;
  std::vector<double> rounds_axis(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    rounds_axis[static_cast<std::size_t>(t)] = t + 1;
  }

  // Per-record means come from the raw records, keyed like the summary.
  auto mean_series = [&](const std::string& policy, double price,
                         auto&& value_of) {
    std::vector<double> sums(static_cast<std::size_t>(horizon), 0.0);
    int n = 0;
    for (const auto& record : records) {
      if (record.policy != policy || record.input_price != price) continue;
      ++n;
      for (int t = 0; t < horizon; ++t) {
        sums[static_cast<std::size_t>(t)] +=
            value_of(record.rounds[static_cast<std::size_t>(t)]);
      }
    }
    if (n > 0) {
      for (double& v : sums) v /= n;
    }
    return sums;
  };

  for (double price : collect_prices(summary)) {
    const std::string tag = "px" + format_double(price);
    std::vector<svg::Series> regret_series;
    std::vector<svg::Series> profit_series;
    std::vector<std::string> policy_labels;
    std::vector<svg::BoxGroup> regret_boxes;
    std::vector<svg::BoxGroup> profit_boxes;

    for (const auto& cell : summary.cells) {
      if (cell.input_price != price) continue;
      policy_labels.push_back(cell.policy);
      regret_series.push_back(
          {cell.policy, rounds_axis,
           mean_series(cell.policy, price,
                       [](const RoundLog& log) { return log.regret_cum; })});
      // Running realized-profit average per round.
      std::vector<double> avg(static_cast<std::size_t>(horizon), 0.0);
      const auto totals =
          mean_series(cell.policy, price, [](const RoundLog& log) {
            return log.profit_realized;
          });
      double running = 0.0;
      for (int t = 0; t < horizon; ++t) {
        running += totals[static_cast<std::size_t>(t)];
        avg[static_cast<std::size_t>(t)] = running / (t + 1);
      }
      profit_series.push_back({cell.policy, rounds_axis, avg});
    }
    if (policy_labels.empty()) continue;

    const std::vector<int> checkpoints = checkpoint_rounds(horizon);
    for (int checkpoint : checkpoints) {
      svg::BoxGroup rg, pg;
      rg.label = "round " + std::to_string(checkpoint);
      pg.label = rg.label;
      for (const auto& cell : summary.cells) {
        if (cell.input_price != price) continue;
        for (const auto& cs : cell.checkpoints) {
          if (cs.round != checkpoint) continue;
          rg.boxes.push_back({cs.regret.q1, cs.regret.median, cs.regret.q3,
                              cs.regret.min, cs.regret.max});
          pg.boxes.push_back({cs.avg_profit.q1, cs.avg_profit.median,
                              cs.avg_profit.q3, cs.avg_profit.min,
                              cs.avg_profit.max});
        }
      }
      regret_boxes.push_back(std::move(rg));
      profit_boxes.push_back(std::move(pg));
    }

    svg::write_line_chart((dir / ("regret_curves_" + tag + ".svg")).string(),
                          "Mean cumulative regret (p_x = " +
                              format_double(price) + ")",
                          "round", "cumulative regret ($)", regret_series);
    svg::write_line_chart((dir / ("profit_curves_" + tag + ".svg")).string(),
                          "Mean average profit (p_x = " + format_double(price) +
                              ")",
                          "round", "average profit ($)", profit_series);
    svg::write_box_chart((dir / ("regret_boxplot_" + tag + ".svg")).string(),
                         "Cumulative regret at checkpoints (p_x = " +
                             format_double(price) + ")",
                         "cumulative regret ($)", policy_labels, regret_boxes);
    svg::write_box_chart((dir / ("profit_boxplot_" + tag + ".svg")).string(),
                         "Average profit at checkpoints (p_x = " +
                             format_double(price) + ")",
                         "average profit ($)", policy_labels, profit_boxes);

    for (const auto& cell : summary.cells) {
      if (cell.input_price != price) continue;
      std::vector<std::string> arm_labels;
      for (double rate : summary.grid_rates) {
        arm_labels.push_back(format_double(rate) + " lb");
      }
      svg::write_stacked_area(
          (dir / ("arm_props_" + cell.policy + "_" + tag + ".svg")).string(),
          "Running arm shares: " + cell.policy + " (p_x = " +
              format_double(price) + ")",
          "round", arm_labels, cell.arm_props);

      if (!cell.theta_mean.empty() && !cell.theta_mean.front().empty()) {
        const std::size_t dim = cell.theta_mean.front().size();
        std::vector<svg::Panel> panels;
        for (std::size_t j = 0; j < dim; ++j) {
          svg::Panel panel;
          panel.title = "parameter " + std::to_string(j);
          std::vector<double> ys(static_cast<std::size_t>(horizon));
          for (int t = 0; t < horizon; ++t) {
            ys[static_cast<std::size_t>(t)] =
                cell.theta_mean[static_cast<std::size_t>(t)][j];
          }
          panel.series.push_back({"mean estimate", rounds_axis, ys});
          panels.push_back(std::move(panel));
        }
        svg::write_panels(
            (dir / ("theta_mean_" + cell.policy + "_" + tag + ".svg"))
                .string(),
            "Mean parameter trajectories: " + cell.policy + " (p_x = " +
                format_double(price) + ")",
            panels);
      }
    }
  }

  // Mean selected rate per round, one line per price, per policy.
  std::vector<std::string> policies;
  for (const auto& cell : summary.cells) {
    if (std::find(policies.begin(), policies.end(), cell.policy) ==
        policies.end()) {
      policies.push_back(cell.policy);
    }
  }
  for (const auto& policy : policies) {
    std::vector<svg::Series> series;
    for (double price : collect_prices(summary)) {
      series.push_back(
          {"p_x = " + format_double(price), rounds_axis,
           mean_series(policy, price,
                       [](const RoundLog& log) { return log.arm; })});
    }
    svg::write_line_chart((dir / ("mean_rate_" + policy + ".svg")).string(),
                          "Mean selected rate: " + policy, "round",
                          "rate (lb N/ac)", series);
  }
}

}  // namespace

void emit_outputs(const AggregateSummary& summary,
                  const std::vector<RunRecord>& records,
                  const std::string& out_dir) {
  if (records.empty()) {
    throw std::invalid_argument("emit_outputs: record set must be nonempty");
  }
  const std::size_t horizon = records.front().rounds.size();
  for (const auto& record : records) {
    if (record.rounds.size() != horizon) {
      throw std::invalid_argument("emit_outputs: records differ in length");
    }
  }
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + out_dir +
                             "': " + ec.message());
  }
  write_runs_csv((dir / "runs.csv").string(), records);
  write_summary_json((dir / "summary.json").string(), summary);
  write_charts(summary, records, dir);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  struct Task {
    PolicyKind policy;
    double price;
    int replicate;
  };
  std::vector<Task> tasks;
  for (PolicyKind policy : config.policies) {
    for (double price : config.input_prices) {
      for (int rep = 0; rep < config.replicates; ++rep) {
        tasks.push_back({policy, price, rep});
      }
    }
  }

  std::vector<RunRecord> records(tasks.size());
  unsigned n_threads = config.threads > 0
                           ? static_cast<unsigned>(config.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads,
                                 static_cast<unsigned>(tasks.size()));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      records[i] = run_replicate(config, tasks[i].policy, tasks[i].price,
                                 tasks[i].replicate);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) break;
        records[i] = run_replicate(config, tasks[i].policy, tasks[i].price,
                                   tasks[i].replicate);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }

  ExperimentResult result;
  result.records = std::move(records);
  result.summary = aggregate(result.records);
  return result;
}

}  // namespace fertbandit
