#pragma once

// Experiment orchestration: named experiment plans (baseline random split,
// coverage sweep, length split, primitive splits, composed-command
// injection), replicated runs with per-seed splits where the plan resamples,
// aggregate tables (mean, SEM over replications, median), and the
// architecture sweep leaderboard.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scan/eval.hpp"
#include "scan/model.hpp"
#include "scan/splits.hpp"
#include "scan/train.hpp"

namespace scan {

// Every named experiment. Coverage and composed plans expand into one
// variant per percent / count; the rest have a single variant.
extern const std::vector<std::string> kExperimentNames;
bool is_experiment_name(const std::string& name);

// The architecture each experiment defaults to: the overall-best network
// for most, the best jump-task network for the composed-command plan.
ModelConfig overall_best_config();
ModelConfig default_config_for(const std::string& experiment);

struct RunJob {
  std::string experiment;
  std::string variant;  // "" | "p<percent>" | "n<count>"
  ModelConfig config;
  SplitSpec split_spec;
  std::uint64_t seed = 0;  // run seed; overrides tc.seed for this job
  TrainConfig tc;
  bool oracle = false;        // length-oracle second pass
  bool audit = false;         // greedy-search failure audit
  bool neighbors = false;     // encoder-state cosine probes

  std::string label() const;  // experiment_config[_variant]_s<seed>
};

struct NeighborRow {
  std::string probe;
  std::string command;
  double cosine = 0.0;
};

struct RunOutcome {
  std::string experiment;
  std::string variant;
  ModelConfig config;
  SplitSpec split_spec;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  bool ok = false;
  std::string error;

  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double oracle_accuracy = -1.0;
  int search_failures = -1;
  int truncations = 0;
  int train_total = 0;
  int test_total = 0;
  std::map<int, LengthBucket> by_action_length;
  std::map<int, LengthBucket> by_command_length;
  std::map<int, LengthBucket> oracle_by_action_length;
  std::vector<std::pair<std::uint64_t, double>> loss_curve;
  double wall_seconds = 0.0;

  // exp3_jump probes; -2 when not measured (cosine is always >= -1).
  double jump_max_cosine = -2.0;
  double run_max_cosine = -2.0;
  std::vector<NeighborRow> neighbor_table;

  std::string label() const;
};

void to_json(nlohmann::json& j, const LengthBucket& b);
void from_json(const nlohmann::json& j, LengthBucket& b);
void to_json(nlohmann::json& j, const RunOutcome& o);
void from_json(const nlohmann::json& j, RunOutcome& o);

// Sample aggregates over replications. SEM uses the n-1 variance and is 0
// for a single run; median averages the middle pair on even counts.
double mean_of(const std::vector<double>& xs);
double sem_of(const std::vector<double>& xs);
double median_of(std::vector<double> xs);

// Expands an experiment into jobs: one per (config, variant, replication),
// with run seed tc.seed + replication index. Variant lists default to the
// full published sweeps; pass a subset to narrow them.
struct ExperimentPlan {
  std::vector<int> coverage_percents = {1, 2, 4, 8, 16, 32, 64};
  std::vector<int> composed_counts = {1, 2, 4, 8, 16, 32};
};
std::vector<RunJob> plan_experiment(const std::string& name,
                                    const std::vector<ModelConfig>& configs,
                                    const TrainConfig& tc,
                                    const ExperimentPlan& plan = {});

// Trains and evaluates one job end to end. Exceptions land in .error with
// ok = false; they never propagate (a failed replication is recorded).
RunOutcome run_single(const RunJob& job,
                      const std::vector<ScanPair>& dataset);

// Runs jobs on `workers` threads (sequentially when 1) and, when out_dir
// is non-empty, writes runs.tsv, summary.json, per-run loss curves, length
// breakdown tables, and neighbor tables, all atomically.
std::vector<RunOutcome> run_jobs(const std::vector<RunJob>& jobs,
                                 const std::vector<ScanPair>& dataset,
                                 std::size_t workers,
                                 const std::string& out_dir);

std::vector<RunOutcome> run_experiment(const std::string& name,
                                       const std::vector<ModelConfig>& configs,
                                       const TrainConfig& tc,
                                       const std::string& out_dir,
                                       std::size_t workers = 1,
                                       const ExperimentPlan& plan = {});

void write_experiment_report(const std::string& out_dir,
                             const std::string& experiment,
                             const std::vector<RunOutcome>& outcomes);

struct LeaderboardRow {
  ModelConfig config;
  int runs_ok = 0;
  int runs_failed = 0;
  double mean_test = 0.0;
  double sem_test = 0.0;
  double median_test = 0.0;
};

// Replicated runs for every config on the named experiment's default
// variant, ranked by mean test accuracy (desc; config name breaks ties).
// Writes leaderboard.tsv + leaderboard.json under out_dir when non-empty.
std::vector<LeaderboardRow> grid_sweep(const std::string& experiment,
                                       const std::vector<ModelConfig>& configs,
                                       const TrainConfig& tc,
                                       const std::string& out_dir,
                                       std::size_t workers = 1);

}  // namespace scan
