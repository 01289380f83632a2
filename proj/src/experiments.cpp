#include "scan/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "scan/fs_util.hpp"
#include "scan/json_io.hpp"

namespace scan {

const std::vector<std::string> kExperimentNames = {
    "exp1_random",    "exp1_coverage", "exp2_length",
    "exp3_turn_left", "exp3_jump",     "exp3_jump_composed"};

bool is_experiment_name(const std::string& name) {
  return std::find(kExperimentNames.begin(), kExperimentNames.end(), name) !=
         kExperimentNames.end();
}

ModelConfig overall_best_config() {
  ModelConfig cfg;
  cfg.cell = CellType::kLstm;
  cfg.layers = 2;
  cfg.hidden = 200;
  cfg.dropout = 0.5;
  cfg.attention = false;
  return cfg;
}

ModelConfig default_config_for(const std::string& experiment) {
  if (experiment == "exp3_jump_composed") {
    // Best jump-task architecture; it is retrained with composed commands.
    ModelConfig cfg;
    cfg.cell = CellType::kLstm;
    cfg.layers = 1;
    cfg.hidden = 100;
    cfg.dropout = 0.1;
    cfg.attention = true;
    return cfg;
  }
  return overall_best_config();
}

namespace {

std::string make_label(const std::string& experiment, const ModelConfig& cfg,
                       const std::string& variant, std::uint64_t seed) {
  std::string label = experiment + "_" + cfg.name();
  if (!variant.empty()) label += "_" + variant;
  return label + "_s" + std::to_string(seed);
}

std::string fmt(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string RunJob::label() const {
  return make_label(experiment, config, variant, seed);
}

std::string RunOutcome::label() const {
  return make_label(experiment, config, variant, seed);
}

void to_json(nlohmann::json& j, const LengthBucket& b) {
  j = {{"correct", b.correct}, {"total", b.total}};
}

void from_json(const nlohmann::json& j, LengthBucket& b) {
  j.at("correct").get_to(b.correct);
  j.at("total").get_to(b.total);
}

void to_json(nlohmann::json& j, const NeighborRow& r) {
  j = {{"probe", r.probe}, {"command", r.command}, {"cosine", r.cosine}};
}

void from_json(const nlohmann::json& j, NeighborRow& r) {
  j.at("probe").get_to(r.probe);
  j.at("command").get_to(r.command);
  j.at("cosine").get_to(r.cosine);
}

void to_json(nlohmann::json& j, const RunOutcome& o) {
  j = {{"experiment", o.experiment},
       {"variant", o.variant},
       {"config", o.config},
       {"split", o.split_spec},
       {"seed", o.seed},
       {"steps", o.steps},
       {"ok", o.ok},
       {"error", o.error},
       {"train_accuracy", o.train_accuracy},
       {"test_accuracy", o.test_accuracy},
       {"oracle_accuracy", o.oracle_accuracy},
       {"search_failures", o.search_failures},
       {"truncations", o.truncations},
       {"train_total", o.train_total},
       {"test_total", o.test_total},
       {"by_action_length", o.by_action_length},
       {"by_command_length", o.by_command_length},
       {"oracle_by_action_length", o.oracle_by_action_length},
       {"loss_curve", o.loss_curve},
       {"wall_seconds", o.wall_seconds},
       {"jump_max_cosine", o.jump_max_cosine},
       {"run_max_cosine", o.run_max_cosine},
       {"neighbor_table", o.neighbor_table}};
}

void from_json(const nlohmann::json& j, RunOutcome& o) {
  j.at("experiment").get_to(o.experiment);
  j.at("variant").get_to(o.variant);
  j.at("config").get_to(o.config);
  j.at("split").get_to(o.split_spec);
  j.at("seed").get_to(o.seed);
  j.at("steps").get_to(o.steps);
  j.at("ok").get_to(o.ok);
  j.at("error").get_to(o.error);
  j.at("train_accuracy").get_to(o.train_accuracy);
  j.at("test_accuracy").get_to(o.test_accuracy);
  j.at("oracle_accuracy").get_to(o.oracle_accuracy);
  j.at("search_failures").get_to(o.search_failures);
  j.at("truncations").get_to(o.truncations);
  j.at("train_total").get_to(o.train_total);
  j.at("test_total").get_to(o.test_total);
  j.at("by_action_length").get_to(o.by_action_length);
  j.at("by_command_length").get_to(o.by_command_length);
  j.at("oracle_by_action_length").get_to(o.oracle_by_action_length);
  j.at("loss_curve").get_to(o.loss_curve);
  j.at("wall_seconds").get_to(o.wall_seconds);
  j.at("jump_max_cosine").get_to(o.jump_max_cosine);
  j.at("run_max_cosine").get_to(o.run_max_cosine);
  j.at("neighbor_table").get_to(o.neighbor_table);
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / double(xs.size());
}

double sem_of(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double sq = 0.0;
  for (double x : xs) sq += (x - m) * (x - m);
  return std::sqrt(sq / double(n - 1)) / std::sqrt(double(n));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::vector<RunJob> plan_experiment(const std::string& name,
                                    const std::vector<ModelConfig>& configs,
                                    const TrainConfig& tc,
                                    const ExperimentPlan& plan) {
  if (!is_experiment_name(name)) {
    throw std::invalid_argument("unknown experiment: " + name);
  }
  if (configs.empty()) {
    throw std::invalid_argument("experiment needs at least one model config");
  }
  tc.validate();

  // One (spec template, variant) per plan point; the split seed is stamped
  // per replication below for the plans that resample.
  struct Variant {
    std::string tag;
    SplitSpec spec;
    bool reseed_split = false;
  };
  std::vector<Variant> variants;
  bool oracle = false, audit = false, neighbors = false;
  if (name == "exp1_random") {
    SplitSpec spec;
    spec.kind = SplitKind::kRandom;
    spec.fraction = 0.8;
    variants.push_back({"", spec, true});
  } else if (name == "exp1_coverage") {
    for (int p : plan.coverage_percents) {
      SplitSpec spec;
      spec.kind = SplitKind::kCoverage;
      spec.coverage_percent = p;
      variants.push_back({"p" + std::to_string(p), spec, true});
    }
  } else if (name == "exp2_length") {
    SplitSpec spec;
    spec.kind = SplitKind::kLength;
    spec.length_cutoff = 22;
    variants.push_back({"", spec, false});
    oracle = audit = true;
  } else if (name == "exp3_turn_left") {
    SplitSpec spec;
    spec.kind = SplitKind::kPrimitive;
    spec.target = PrimitiveTarget::kTurnLeft;
    variants.push_back({"", spec, false});
    audit = true;
  } else if (name == "exp3_jump") {
    SplitSpec spec;
    spec.kind = SplitKind::kPrimitive;
    spec.target = PrimitiveTarget::kJump;
    variants.push_back({"", spec, false});
    audit = neighbors = true;
  } else {  // exp3_jump_composed
    for (int n : plan.composed_counts) {
      SplitSpec spec;
      spec.kind = SplitKind::kPrimitivePlusComposed;
      spec.target = PrimitiveTarget::kJump;
      spec.num_composed = n;
      variants.push_back({"n" + std::to_string(n), spec, true});
    }
    audit = true;
  }

  std::vector<RunJob> jobs;
  for (const ModelConfig& cfg : configs) {
    cfg.validate();
    for (const Variant& v : variants) {
      for (int r = 0; r < tc.replication_count; ++r) {
        RunJob job;
        job.experiment = name;
        job.variant = v.tag;
        job.config = cfg;
        job.split_spec = v.spec;
        job.seed = tc.seed + std::uint64_t(r);
        job.split_spec.seed = v.reseed_split ? job.seed : 0;
        job.split_spec.validate();
        job.tc = tc;
        job.oracle = oracle;
        job.audit = audit;
        job.neighbors = neighbors;
        jobs.push_back(std::move(job));
      }
    }
  }
  return jobs;
}

namespace {

double max_cosine_to(Seq2SeqModel& model, const std::string& probe,
                     const std::vector<std::string>& pool) {
  return nearest_neighbors(model, probe, pool, 1, true).at(0).cosine;
}

}  // namespace

RunOutcome run_single(const RunJob& job, const std::vector<ScanPair>& dataset) {
  RunOutcome out;
  out.experiment = job.experiment;
  out.variant = job.variant;
  out.config = job.config;
  out.split_spec = job.split_spec;
  out.seed = job.seed;
  out.steps = job.tc.steps;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Split split = build_split(dataset, job.split_spec);
    TrainConfig tc = job.tc;
    tc.seed = job.seed;
    TrainResult trained = train(job.config, split, tc);
    Seq2SeqModel& model = *trained.model;
    out.loss_curve = std::move(trained.loss_curve);

    const auto train_pairs = encode_pairs(split.train);
    const auto test_pairs = encode_pairs(split.test);
    const EvalReport train_report = evaluate(model, train_pairs);
    out.train_accuracy = train_report.accuracy;
    out.train_total = train_report.total;

    const EvalReport test_report =
        job.oracle ? evaluate_with_length_oracle(model, test_pairs)
                   : evaluate(model, test_pairs);
    out.test_accuracy = test_report.accuracy;
    out.oracle_accuracy = test_report.oracle_accuracy;
    out.truncations = test_report.truncations;
    out.test_total = test_report.total;
    out.by_action_length = test_report.by_action_length;
    out.by_command_length = test_report.by_command_length;
    out.oracle_by_action_length = test_report.oracle_by_action_length;

    if (job.audit) {
      out.search_failures = search_failure_audit(model, test_pairs);
    }
    if (job.neighbors) {
      std::vector<std::string> pool;
      pool.reserve(split.train.size());
      for (const ScanPair& p : split.train) pool.push_back(p.command);
      for (const std::string& probe :
           {std::string("jump"), std::string("run"), std::string("jump twice"),
            std::string("run twice")}) {
        for (const Neighbor& n : nearest_neighbors(model, probe, pool, 5)) {
          out.neighbor_table.push_back({probe, n.command, n.cosine});
        }
      }
      out.jump_max_cosine = max_cosine_to(model, "jump", pool);
      out.run_max_cosine = max_cosine_to(model, "run", pool);
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

namespace {

void write_runs_tsv(const std::string& out_dir,
                    const std::vector<RunOutcome>& outcomes) {
  std::string tsv =
      "experiment\tconfig\tvariant\tseed\tsteps\tok\ttrain_acc\ttest_acc"
      "\toracle_acc\tsearch_failures\ttruncations\ttest_total\twall_s\terror\n";
  for (const RunOutcome& o : outcomes) {
    tsv += o.experiment + "\t" + o.config.name() + "\t" + o.variant + "\t" +
           std::to_string(o.seed) + "\t" + std::to_string(o.steps) + "\t" +
           (o.ok ? "1" : "0") + "\t" + fmt(o.train_accuracy) + "\t" +
           fmt(o.test_accuracy) + "\t" + fmt(o.oracle_accuracy) + "\t" +
           std::to_string(o.search_failures) + "\t" +
           std::to_string(o.truncations) + "\t" +
           std::to_string(o.test_total) + "\t" + fmt(o.wall_seconds, 1) +
           "\t" + sanitize(o.error) + "\n";
  }
  atomic_write_file((std::filesystem::path(out_dir) / "runs.tsv").string(),
                    tsv);
}

void write_loss_curves(const std::string& out_dir,
                       const std::vector<RunOutcome>& outcomes) {
  for (const RunOutcome& o : outcomes) {
    if (!o.ok || o.loss_curve.empty()) continue;
    std::string tsv = "step\tloss\n";
    for (const auto& [step, loss] : o.loss_curve) {
      tsv += std::to_string(step) + "\t" + fmt(loss) + "\n";
    }
    atomic_write_file((std::filesystem::path(out_dir) /
                       ("loss_" + o.label() + ".tsv"))
                          .string(),
                      tsv);
  }
}

void write_neighbor_tables(const std::string& out_dir,
                           const std::vector<RunOutcome>& outcomes) {
  for (const RunOutcome& o : outcomes) {
    if (o.neighbor_table.empty()) continue;
    std::string tsv = "probe\tneighbor\tcosine\n";
    for (const NeighborRow& r : o.neighbor_table) {
      tsv += r.probe + "\t" + r.command + "\t" + fmt(r.cosine) + "\n";
    }
    atomic_write_file((std::filesystem::path(out_dir) /
                       ("neighbors_" + o.label() + ".tsv"))
                          .string(),
                      tsv);
  }
}

struct LengthStats {
  std::vector<double> plain, oracle;
};

void write_length_table(const std::string& out_dir, const std::string& stem,
                        const std::map<int, LengthStats>& stats) {
  std::string tsv = "length\tn_runs\tmean\tsem\toracle_mean\toracle_sem\n";
  for (const auto& [len, s] : stats) {
    tsv += std::to_string(len) + "\t" + std::to_string(s.plain.size()) + "\t" +
           fmt(mean_of(s.plain)) + "\t" + fmt(sem_of(s.plain)) + "\t" +
           (s.oracle.empty() ? "-1" : fmt(mean_of(s.oracle))) + "\t" +
           (s.oracle.empty() ? "-1" : fmt(sem_of(s.oracle))) + "\n";
  }
  atomic_write_file(
      (std::filesystem::path(out_dir) / (stem + ".tsv")).string(), tsv);
}

}  // namespace

void write_experiment_report(const std::string& out_dir,
                             const std::string& experiment,
                             const std::vector<RunOutcome>& outcomes) {
  std::filesystem::create_directories(out_dir);
  write_runs_tsv(out_dir, outcomes);
  write_loss_curves(out_dir, outcomes);
  write_neighbor_tables(out_dir, outcomes);

  // Group replications by (config, variant), keeping first-seen order.
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<const RunOutcome*>>
      groups;
  for (const RunOutcome& o : outcomes) {
    const auto key = std::make_pair(o.config.name(), o.variant);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&o);
  }

  nlohmann::json summary;
  summary["experiment"] = experiment;
  summary["groups"] = nlohmann::json::array();
  for (const auto& key : order) {
    const auto& runs = groups[key];
    std::vector<double> test, train, oracle, failures;
    int failed = 0;
    for (const RunOutcome* o : runs) {
      if (!o->ok) {
        ++failed;
        continue;
      }
      test.push_back(o->test_accuracy);
      train.push_back(o->train_accuracy);
      if (o->oracle_accuracy >= 0.0) oracle.push_back(o->oracle_accuracy);
      if (o->search_failures >= 0) failures.push_back(o->search_failures);
    }
    nlohmann::json g;
    g["config"] = key.first;
    g["variant"] = key.second;
    g["n_ok"] = test.size();
    g["n_failed"] = failed;
    g["steps"] = runs.front()->steps;
    g["test"] = {{"mean", mean_of(test)},
                 {"sem", sem_of(test)},
                 {"median", median_of(test)}};
    g["train"] = {{"mean", mean_of(train)},
                  {"sem", sem_of(train)},
                  {"median", median_of(train)}};
    if (!oracle.empty()) {
      g["oracle"] = {{"mean", mean_of(oracle)},
                     {"sem", sem_of(oracle)},
                     {"median", median_of(oracle)}};
    }
    if (!failures.empty()) {
      g["search_failures_mean"] = mean_of(failures);
    }
    summary["groups"].push_back(std::move(g));

    // Per-length accuracy across this group's runs, by action length and
    // command length; lengths a run lacks simply contribute no sample.
    std::map<int, LengthStats> by_action, by_command;
    for (const RunOutcome* o : runs) {
      if (!o->ok) continue;
      for (const auto& [len, b] : o->by_action_length) {
        by_action[len].plain.push_back(b.accuracy());
      }
      for (const auto& [len, b] : o->oracle_by_action_length) {
        by_action[len].oracle.push_back(b.accuracy());
      }
      for (const auto& [len, b] : o->by_command_length) {
        by_command[len].plain.push_back(b.accuracy());
      }
    }
    std::string stem = key.first;
    if (!key.second.empty()) stem += "_" + key.second;
    write_length_table(out_dir, "by_action_length_" + stem, by_action);
    write_length_table(out_dir, "by_command_length_" + stem, by_command);
  }
  atomic_write_file(
      (std::filesystem::path(out_dir) / "summary.json").string(),
      summary.dump(2) + "\n");
}

std::vector<RunOutcome> run_jobs(const std::vector<RunJob>& jobs,
                                 const std::vector<ScanPair>& dataset,
                                 std::size_t workers,
                                 const std::string& out_dir) {
  std::vector<RunOutcome> outcomes(jobs.size());
  if (workers <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      outcomes[i] = run_single(jobs[i], dataset);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        outcomes[i] = run_single(jobs[i], dataset);
      }
    };
    std::vector<std::thread> threads;
    const std::size_t n = std::min(workers, jobs.size());
    threads.reserve(n);
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (!out_dir.empty() && !jobs.empty()) {
    write_experiment_report(out_dir, jobs.front().experiment, outcomes);
  }
  return outcomes;
}

std::vector<RunOutcome> run_experiment(const std::string& name,
                                       const std::vector<ModelConfig>& configs,
                                       const TrainConfig& tc,
                                       const std::string& out_dir,
                                       std::size_t workers,
                                       const ExperimentPlan& plan) {
  return run_jobs(plan_experiment(name, configs, tc, plan), build_dataset(),
                  workers, out_dir);
}

std::vector<LeaderboardRow> grid_sweep(const std::string& experiment,
                                       const std::vector<ModelConfig>& configs,
                                       const TrainConfig& tc,
                                       const std::string& out_dir,
                                       std::size_t workers) {
  const std::vector<ScanPair> dataset = build_dataset();
  const auto jobs = plan_experiment(experiment, configs, tc);
  const auto outcomes = run_jobs(jobs, dataset, workers, out_dir);

  std::vector<LeaderboardRow> rows;
  for (const ModelConfig& cfg : configs) {
    LeaderboardRow row;
    row.config = cfg;
    std::vector<double> test;
    for (const RunOutcome& o : outcomes) {
      if (!(o.config == cfg)) continue;
      if (o.ok) {
        test.push_back(o.test_accuracy);
      } else {
        ++row.runs_failed;
      }
    }
    row.runs_ok = int(test.size());
    row.mean_test = mean_of(test);
    row.sem_test = sem_of(test);
    row.median_test = median_of(test);
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const LeaderboardRow& a, const LeaderboardRow& b) {
              if (a.mean_test != b.mean_test) return a.mean_test > b.mean_test;
              return a.config.name() < b.config.name();
            });

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::string tsv =
        "rank\tconfig\truns_ok\truns_failed\tmean_test\tsem_test\tmedian_"
        "test\n";
    nlohmann::json board = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const LeaderboardRow& r = rows[i];
      tsv += std::to_string(i + 1) + "\t" + r.config.name() + "\t" +
             std::to_string(r.runs_ok) + "\t" + std::to_string(r.runs_failed) +
             "\t" + fmt(r.mean_test) + "\t" + fmt(r.sem_test) + "\t" +
             fmt(r.median_test) + "\n";
      board.push_back({{"rank", i + 1},
                       {"config", r.config},
                       {"runs_ok", r.runs_ok},
                       {"runs_failed", r.runs_failed},
                       {"mean_test", r.mean_test},
                       {"sem_test", r.sem_test},
                       {"median_test", r.median_test}});
    }
    atomic_write_file(
        (std::filesystem::path(out_dir) / "leaderboard.tsv").string(), tsv);
    atomic_write_file(
        (std::filesystem::path(out_dir) / "leaderboard.json").string(),
        board.dump(2) + "\n");
  }
  return rows;
}

}  // namespace scan
