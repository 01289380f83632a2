// Command-line front end: dataset generation, split construction, training,
// evaluation, encoder-similarity analysis, experiment plans, and the
// architecture sweep. Every subcommand writes its outputs plus one
// manifest.json into a single directory; flags override config-file values,
// which override defaults, and the resolved config is echoed into the
// manifest. Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "scan/checkpoint.hpp"
#include "scan/dataset_io.hpp"
#include "scan/eval.hpp"
#include "scan/experiments.hpp"
#include "scan/fs_util.hpp"
#include "scan/grammar.hpp"
#include "scan/json_io.hpp"
#include "scan/manifest.hpp"
#include "scan/splits.hpp"
#include "scan/train.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string out_root() {
  const char* env = std::getenv("SCAN_OUT_ROOT");
  return env && *env ? env : "runs";
}

// Flag > config file > default: a flag that was passed already holds the
// winning value, so only absent flags fall back to the file.
template <typename T>
void merge_key(const CLI::App& cmd, const std::string& flag, const json& file,
               const char* key, T& value) {
  if (cmd.count(flag) > 0) return;
  if (file.contains(key)) value = file.at(key).get<T>();
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  return json::parse(scan::read_file(path));
}

std::vector<std::string> list_outputs(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

json bucket_json(const std::map<int, scan::LengthBucket>& buckets) {
  json j = json::object();
  for (const auto& [len, b] : buckets) {
    j[std::to_string(len)] = {{"correct", b.correct},
                              {"total", b.total},
                              {"accuracy", b.accuracy()}};
  }
  return j;
}

std::string bucket_tsv(const std::map<int, scan::LengthBucket>& buckets) {
  std::string tsv = "length\tcorrect\ttotal\taccuracy\n";
  char buf[32];
  for (const auto& [len, b] : buckets) {
    std::snprintf(buf, sizeof buf, "%.6f", b.accuracy());
    tsv += std::to_string(len) + "\t" + std::to_string(b.correct) + "\t" +
           std::to_string(b.total) + "\t" + buf + "\n";
  }
  return tsv;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// Shared model/train flag block for train, experiment, and sweep.
struct ModelFlags {
  std::string cell = "lstm";
  int layers = 2;
  int hidden = 200;
  double dropout = 0.5;
  bool attention = false;

  void attach(CLI::App& cmd) {
    cmd.add_option("--cell", cell, "Recurrent cell: srn, gru, or lstm");
    cmd.add_option("--layers", layers, "Recurrent layers (1 or 2)");
    cmd.add_option("--hidden", hidden, "Hidden (and embedding) width");
    cmd.add_option("--dropout", dropout, "Dropout probability");
    cmd.add_flag("--attention,!--no-attention", attention,
                 "Decoder attention over encoder states");
  }
  void merge(const CLI::App& cmd, const json& file) {
    merge_key(cmd, "--cell", file, "cell", cell);
    merge_key(cmd, "--layers", file, "layers", layers);
    merge_key(cmd, "--hidden", file, "hidden", hidden);
    merge_key(cmd, "--dropout", file, "dropout", dropout);
    merge_key(cmd, "--attention", file, "attention", attention);
  }
  scan::ModelConfig resolve() const {
    scan::ModelConfig cfg;
    cfg.cell = scan::cell_type_from_string(cell);
    cfg.layers = layers;
    cfg.hidden = hidden;
    cfg.dropout = dropout;
    cfg.attention = attention;
    cfg.validate();
    return cfg;
  }
  // count("--attention") covers the negated form; both bind one option.
  bool any_passed(const CLI::App& cmd) const {
    return cmd.count("--cell") || cmd.count("--layers") ||
           cmd.count("--hidden") || cmd.count("--dropout") ||
           cmd.count("--attention");
  }
  static bool any_in(const json& file) {
    return file.contains("cell") || file.contains("layers") ||
           file.contains("hidden") || file.contains("dropout") ||
           file.contains("attention");
  }
};

struct TrainFlags {
  scan::TrainConfig tc;

  void attach(CLI::App& cmd) {
    cmd.add_option("--steps", tc.steps, "Training presentations");
    cmd.add_option("--lr", tc.learning_rate, "ADAM learning rate");
    cmd.add_option("--clip-norm", tc.clip_norm, "Global gradient-norm cap");
    cmd.add_option("--teacher-forcing", tc.teacher_forcing_prob,
                   "Per-presentation teacher-forcing probability");
    cmd.add_option("--seed", tc.seed, "Base run seed");
    cmd.add_option("--replications", tc.replication_count,
                   "Replications per grid point");
  }
  void merge(const CLI::App& cmd, const json& file) {
    merge_key(cmd, "--steps", file, "steps", tc.steps);
    merge_key(cmd, "--lr", file, "learning_rate", tc.learning_rate);
    merge_key(cmd, "--clip-norm", file, "clip_norm", tc.clip_norm);
    merge_key(cmd, "--teacher-forcing", file, "teacher_forcing",
              tc.teacher_forcing_prob);
    merge_key(cmd, "--seed", file, "seed", tc.seed);
    merge_key(cmd, "--replications", file, "replications",
              tc.replication_count);
  }
};

int run_generate(const std::string& out_path) {
  Timer timer;
  const fs::path path =
      out_path.empty() ? fs::path(out_root()) / "tasks.txt" : fs::path(out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto dataset = scan::build_dataset();
  scan::write_pairs(path, dataset);

  scan::RunManifest m;
  m.subcommand = "generate";
  m.config = {{"out", path.string()}, {"pairs", dataset.size()}};
  m.outputs = {path.filename().string()};
  m.wall_seconds = timer.seconds();
  const fs::path manifest_dir =
      path.has_parent_path() ? path.parent_path() : fs::path(".");
  scan::write_manifest(manifest_dir, m);
  std::cout << "wrote " << dataset.size() << " pairs to " << path.string()
            << "\n";
  return 0;
}

int run_split(const scan::SplitSpec& spec, const std::string& out_dir) {
  Timer timer;
  spec.validate();
  const auto dataset = scan::build_dataset();
  const scan::Split split = scan::build_split(dataset, spec);
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  scan::save_split(split, dir);

  scan::RunManifest m;
  m.subcommand = "split";
  m.config = spec;
  m.seeds = {spec.seed};
  m.outputs = list_outputs(dir);
  m.wall_seconds = timer.seconds();
  scan::write_manifest(dir, m);
  std::cout << spec.name() << ": train " << split.train.size() << ", test "
            << split.test.size() << "\n";
  return 0;
}

int run_train(const CLI::App& cmd, ModelFlags& mf, TrainFlags& tf,
              const std::string& config_path, const std::string& split_dir,
              const std::string& resume_path, std::uint64_t progress_every,
              const std::string& out_dir) {
  Timer timer;
  const json file = load_config_file(config_path);
  mf.merge(cmd, file);
  tf.merge(cmd, file);
  if (!resume_path.empty() && mf.any_passed(cmd)) {
    throw std::invalid_argument(
        "--resume restores the architecture from the checkpoint; model flags "
        "conflict with it");
  }

  const scan::Split split = scan::load_split(split_dir);
  const auto progress = [](std::uint64_t step, double loss) {
    std::cerr << "step " << step << " loss " << loss << "\n";
  };
  scan::TrainResult result;
  scan::ModelConfig model_cfg;
  scan::TrainConfig tc;
  if (resume_path.empty()) {
    model_cfg = mf.resolve();
    tc = tf.tc;
    tc.validate();
    result = scan::train(model_cfg, split, tc,
                         progress_every ? progress : scan::ProgressFn{},
                         progress_every);
  } else {
    scan::Checkpoint start = scan::load_checkpoint(resume_path);
    if (cmd.count("--steps")) start.tc.steps = tf.tc.steps;
    model_cfg = start.config;
    tc = start.tc;
    result = scan::resume_training(start, split,
                                   progress_every ? progress : scan::ProgressFn{},
                                   progress_every);
  }

  const fs::path dir = out_dir;
  fs::create_directories(dir);
  // steps_run counts this invocation only; a finished run (fresh or resumed)
  // has always reached the target, so the checkpoint records tc.steps.
  const scan::Checkpoint ckpt =
      scan::snapshot(*result.model, tc, tc.steps, result.present_state,
                     result.teacher_state, result.dropout_state);
  scan::save_checkpoint((dir / "checkpoint.bin").string(), ckpt);

  std::string curve = "step\tloss\n";
  char buf[32];
  for (const auto& [step, loss] : result.loss_curve) {
    std::snprintf(buf, sizeof buf, "%.6f", loss);
    curve += std::to_string(step) + "\t" + buf + "\n";
  }
  scan::atomic_write_file((dir / "loss_curve.tsv").string(), curve);

  json summary = {{"steps_run", result.steps_run},
                  {"steps_total", tc.steps},
                  {"final_loss", result.loss_curve.empty()
                                     ? -1.0
                                     : result.loss_curve.back().second}};
  scan::atomic_write_file((dir / "result.json").string(),
                          summary.dump(2) + "\n");

  scan::RunManifest m;
  m.subcommand = "train";
  m.config = {{"model", model_cfg},
              {"train", tc},
              {"split_dir", split_dir},
              {"resume", resume_path}};
  m.seeds = {tc.seed};
  std::vector<std::string> inputs = {split_dir + "/train.txt",
                                     split_dir + "/test.txt",
                                     split_dir + "/meta.json"};
  if (!config_path.empty()) inputs.push_back(config_path);
  if (!resume_path.empty()) inputs.push_back(resume_path);
  m.inputs = scan::digest_inputs(inputs);
  m.outputs = list_outputs(dir);
  m.wall_seconds = timer.seconds();
  scan::write_manifest(dir, m);
  std::cout << "trained " << model_cfg.name() << " for " << result.steps_run
            << " steps, final loss "
            << (result.loss_curve.empty() ? -1.0
                                          : result.loss_curve.back().second)
            << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_path,
             bool oracle, bool audit, std::size_t max_len,
             const std::string& out_dir) {
  Timer timer;
  const scan::Checkpoint ckpt = scan::load_checkpoint(ckpt_path);
  const auto model = scan::restore_model(ckpt);
  const auto pairs = scan::encode_pairs(scan::read_pairs(data_path));
  scan::EvalReport report =
      oracle ? scan::evaluate_with_length_oracle(*model, pairs, max_len)
             : scan::evaluate(*model, pairs, max_len);
  if (audit) {
    report.search_failures = scan::search_failure_audit(*model, pairs, max_len);
  }

  const fs::path dir = out_dir;
  fs::create_directories(dir);
  json j = {{"accuracy", report.accuracy},
            {"total", report.total},
            {"truncations", report.truncations},
            {"by_action_length", bucket_json(report.by_action_length)},
            {"by_command_length", bucket_json(report.by_command_length)}};
  if (report.oracle_accuracy >= 0.0) {
    j["oracle_accuracy"] = report.oracle_accuracy;
    j["oracle_by_action_length"] =
        bucket_json(report.oracle_by_action_length);
  }
  if (report.search_failures >= 0) {
    j["search_failures"] = report.search_failures;
  }
  scan::atomic_write_file((dir / "report.json").string(), j.dump(2) + "\n");
  scan::atomic_write_file((dir / "by_action_length.tsv").string(),
                          bucket_tsv(report.by_action_length));
  scan::atomic_write_file((dir / "by_command_length.tsv").string(),
                          bucket_tsv(report.by_command_length));

  scan::RunManifest m;
  m.subcommand = "eval";
  m.config = {{"checkpoint", ckpt_path},
              {"data", data_path},
              {"oracle_length", oracle},
              {"audit", audit},
              {"max_len", max_len},
              {"model", ckpt.config}};
  m.seeds = {ckpt.tc.seed};
  m.inputs = scan::digest_inputs({ckpt_path, data_path});
  m.outputs = list_outputs(dir);
  m.wall_seconds = timer.seconds();
  scan::write_manifest(dir, m);
  std::cout << "accuracy " << report.accuracy;
  if (report.oracle_accuracy >= 0.0) {
    std::cout << " (oracle " << report.oracle_accuracy << ")";
  }
  std::cout << " on " << report.total << " pairs\n";
  return 0;
}

int run_neighbors(const std::string& ckpt_path, const std::string& pool_path,
                  const std::vector<std::string>& probes, std::size_t k,
                  bool include_self, const std::string& out_dir) {
  Timer timer;
  const scan::Checkpoint ckpt = scan::load_checkpoint(ckpt_path);
  const auto model = scan::restore_model(ckpt);
  std::vector<std::string> pool;
  for (const scan::ScanPair& p : scan::read_pairs(pool_path)) {
    pool.push_back(p.command);
  }

  std::string tsv = "probe\tneighbor\tcosine\n";
  char buf[32];
  for (const std::string& probe : probes) {
    for (const scan::Neighbor& n :
         scan::nearest_neighbors(*model, probe, pool, k, !include_self)) {
      std::snprintf(buf, sizeof buf, "%.6f", n.cosine);
      tsv += probe + "\t" + n.command + "\t" + buf + "\n";
    }
  }
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  scan::atomic_write_file((dir / "neighbors.tsv").string(), tsv);

  scan::RunManifest m;
  m.subcommand = "analyze";
  m.config = {{"mode", "neighbors"}, {"checkpoint", ckpt_path},
              {"pool", pool_path},  {"probes", probes},
              {"k", k},             {"include_self", include_self}};
  m.seeds = {ckpt.tc.seed};
  m.inputs = scan::digest_inputs({ckpt_path, pool_path});
  m.outputs = list_outputs(dir);
  m.wall_seconds = timer.seconds();
  scan::write_manifest(dir, m);
  std::cout << "wrote " << (dir / "neighbors.tsv").string() << "\n";
  return 0;
}

int run_experiment_cmd(const CLI::App& cmd, ModelFlags& mf, TrainFlags& tf,
                       const std::string& config_path, const std::string& name,
                       std::vector<int> percents, std::vector<int> counts,
                       std::size_t workers, const std::string& out_dir) {
  Timer timer;
  const json file = load_config_file(config_path);
  mf.merge(cmd, file);
  tf.merge(cmd, file);
  tf.tc.validate();

  const scan::ModelConfig cfg = mf.any_passed(cmd) || ModelFlags::any_in(file)
                                    ? mf.resolve()
                                    : scan::default_config_for(name);
  scan::ExperimentPlan plan;
  if (!percents.empty()) plan.coverage_percents = percents;
  if (!counts.empty()) plan.composed_counts = counts;

  const auto outcomes =
      scan::run_experiment(name, {cfg}, tf.tc, out_dir, workers, plan);
  int failed = 0;
  for (const auto& o : outcomes) failed += o.ok ? 0 : 1;

  scan::RunManifest m;
  m.subcommand = "experiment";
  m.config = {{"experiment", name},
              {"model", cfg},
              {"train", tf.tc},
              {"coverage_percents", plan.coverage_percents},
              {"composed_counts", plan.composed_counts},
              {"workers", workers}};
  for (int r = 0; r < tf.tc.replication_count; ++r) {
    m.seeds.push_back(tf.tc.seed + std::uint64_t(r));
  }
  if (!config_path.empty()) m.inputs = scan::digest_inputs({config_path});
  m.outputs = list_outputs(out_dir);
  m.wall_seconds = timer.seconds();
  scan::write_manifest(out_dir, m);
  std::cout << name << ": " << outcomes.size() - failed << "/"
            << outcomes.size() << " runs ok, report in " << out_dir << "\n";
  if (failed) std::cerr << failed << " replication(s) failed; see runs.tsv\n";
  return 0;
}

int run_sweep(const CLI::App& cmd, TrainFlags& tf,
              const std::string& config_path, const std::string& name,
              const std::vector<std::string>& cells,
              const std::vector<int>& layer_counts,
              const std::vector<int>& hidden_sizes,
              const std::vector<double>& dropouts,
              const std::string& attention_mode, std::size_t workers,
              const std::string& out_dir) {
  Timer timer;
  const json file = load_config_file(config_path);
  tf.merge(cmd, file);
  tf.tc.validate();

  std::vector<bool> attention_states;
  if (attention_mode == "both") {
    attention_states = {false, true};
  } else if (attention_mode == "on") {
    attention_states = {true};
  } else if (attention_mode == "off") {
    attention_states = {false};
  } else {
    throw std::invalid_argument("--attention-mode must be both, on, or off");
  }

  std::vector<scan::ModelConfig> grid;
  for (const std::string& cell : cells) {
    for (int layers : layer_counts) {
      for (int hidden : hidden_sizes) {
        for (double dropout : dropouts) {
          for (bool attention : attention_states) {
            scan::ModelConfig cfg;
            cfg.cell = scan::cell_type_from_string(cell);
            cfg.layers = layers;
            cfg.hidden = hidden;
            cfg.dropout = dropout;
            cfg.attention = attention;
            cfg.validate();
            grid.push_back(cfg);
          }
        }
      }
    }
  }

  const auto rows = scan::grid_sweep(name, grid, tf.tc, out_dir, workers);

  scan::RunManifest m;
  m.subcommand = "sweep";
  m.config = {{"experiment", name},
              {"cells", cells},
              {"layer_counts", layer_counts},
              {"hidden_sizes", hidden_sizes},
              {"dropouts", dropouts},
              {"attention_mode", attention_mode},
              {"grid_size", grid.size()},
              {"train", tf.tc},
              {"workers", workers}};
  for (int r = 0; r < tf.tc.replication_count; ++r) {
    m.seeds.push_back(tf.tc.seed + std::uint64_t(r));
  }
  if (!config_path.empty()) m.inputs = scan::digest_inputs({config_path});
  m.outputs = list_outputs(out_dir);
  m.wall_seconds = timer.seconds();
  scan::write_manifest(out_dir, m);
  std::cout << "swept " << grid.size() << " configs; best "
            << (rows.empty() ? "n/a" : rows.front().config.name())
            << ", leaderboard in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional-command sequence-to-sequence workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string(scan::kToolName) + " " + scan::kToolVersion);
  const std::string root = out_root();

  // generate
  auto* generate = app.add_subcommand(
      "generate", "Write the full command/action dataset to a file");
  std::string gen_out;
  generate->add_option("out", gen_out, "Output file (IN:/OUT: lines)");

  // split
  auto* split =
      app.add_subcommand("split", "Build and save a train/test split");
  scan::SplitSpec spec;
  std::string split_kind = "random";
  std::string split_target = "jump";
  std::string split_out = root + "/split";
  split->add_option("--kind", split_kind,
                    "random, coverage, length, primitive, or composed");
  split->add_option("--fraction", spec.fraction, "Train fraction (random)");
  split->add_option("--percent", spec.coverage_percent,
                    "Train percent (coverage)");
  split->add_option("--cutoff", spec.length_cutoff,
                    "Max train action length (length)");
  split->add_option("--target", split_target,
                    "jump or turn_left (primitive/composed)");
  split->add_option("--num-composed", spec.num_composed,
                    "Composed commands moved into training (composed)");
  split->add_flag("--oversample,!--no-oversample", spec.oversample,
                  "Over-sample the sparse primitive during presentation");
  split->add_option("--seed", spec.seed, "Subsampling seed");
  split->add_option("--out", split_out, "Output directory");

  // train
  auto* train = app.add_subcommand("train", "Train one model on a saved split");
  ModelFlags train_mf;
  TrainFlags train_tf;
  std::string train_split_dir, train_config, train_resume;
  std::string train_out = root + "/train";
  std::uint64_t train_progress = 1000;
  train_mf.attach(*train);
  train_tf.attach(*train);
  train->add_option("--split", train_split_dir, "Split directory")->required();
  train->add_option("--config", train_config, "JSON config file");
  train->add_option("--resume", train_resume, "Checkpoint to continue from");
  train->add_option("--progress-every", train_progress,
                    "Progress cadence in steps (0 silences)");
  train->add_option("--out", train_out, "Output directory");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a pairs file");
  std::string eval_ckpt, eval_data;
  std::string eval_out = root + "/eval";
  bool eval_oracle = false, eval_audit = false;
  std::size_t eval_max_len = 64;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--data", eval_data, "Pairs file (IN:/OUT: lines)")
      ->required();
  eval->add_flag("--oracle-length", eval_oracle,
                 "Also score with EOS suppressed until the target length");
  eval->add_flag("--audit", eval_audit,
                 "Count failures where the target outscores the greedy decode");
  eval->add_option("--max-len", eval_max_len, "Decode cap in actions");
  eval->add_option("--out", eval_out, "Output directory");

  // analyze neighbors
  auto* analyze =
      app.add_subcommand("analyze", "Model inspection tools");
  analyze->require_subcommand(1);
  auto* neighbors = analyze->add_subcommand(
      "neighbors", "Nearest training commands by encoder-state cosine");
  std::string nb_ckpt, nb_pool;
  std::string nb_out = root + "/neighbors";
  std::vector<std::string> nb_probes;
  std::size_t nb_k = 5;
  bool nb_include_self = false;
  neighbors->add_option("--checkpoint", nb_ckpt, "Checkpoint file")
      ->required();
  neighbors->add_option("--pool", nb_pool, "Pairs file providing the pool")
      ->required();
  neighbors->add_option("--probe", nb_probes, "Probe command (repeatable)")
      ->required();
  neighbors->add_option("--k", nb_k, "Neighbors per probe");
  neighbors->add_flag("--include-self", nb_include_self,
                      "Keep the probe itself in its neighbor list");
  neighbors->add_option("--out", nb_out, "Output directory");

  // experiment
  auto* experiment = app.add_subcommand(
      "experiment", "Run a named experiment plan with replications");
  ModelFlags exp_mf;
  TrainFlags exp_tf;
  std::string exp_name, exp_config;
  std::string exp_out;
  std::vector<int> exp_percents, exp_counts;
  std::size_t exp_workers = std::max(1u, std::thread::hardware_concurrency());
  experiment->add_option("name", exp_name, "Experiment name")->required();
  exp_mf.attach(*experiment);
  exp_tf.attach(*experiment);
  experiment->add_option("--config", exp_config, "JSON config file");
  experiment
      ->add_option("--percents", exp_percents,
                   "Coverage percents to run (comma separated)")
      ->delimiter(',');
  experiment
      ->add_option("--counts", exp_counts,
                   "Composed-command counts to run (comma separated)")
      ->delimiter(',');
  experiment->add_option("--workers", exp_workers, "Parallel jobs");
  experiment->add_option("--out", exp_out, "Output directory");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Rank architectures over an experiment's default variant");
  TrainFlags sweep_tf;
  std::string sweep_name = "exp1_random", sweep_config;
  std::string sweep_out = root + "/sweep";
  std::vector<std::string> sweep_cells = {"srn", "gru", "lstm"};
  std::vector<int> sweep_layers = {1, 2};
  std::vector<int> sweep_hidden = {25, 50, 100, 200, 400};
  std::vector<double> sweep_dropouts = {0.0, 0.1, 0.5};
  std::string sweep_attention = "both";
  std::size_t sweep_workers = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("name", sweep_name, "Experiment providing the split");
  sweep_tf.attach(*sweep);
  sweep->add_option("--config", sweep_config, "JSON config file");
  sweep->add_option("--cells", sweep_cells, "Cells to sweep")->delimiter(',');
  sweep->add_option("--layer-counts", sweep_layers, "Layer counts")
      ->delimiter(',');
  sweep->add_option("--hidden-sizes", sweep_hidden, "Hidden widths")
      ->delimiter(',');
  sweep->add_option("--dropouts", sweep_dropouts, "Dropout rates")
      ->delimiter(',');
  sweep->add_option("--attention-mode", sweep_attention, "both, on, or off");
  sweep->add_option("--workers", sweep_workers, "Parallel jobs");
  sweep->add_option("--out", sweep_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*generate) return run_generate(gen_out);
    if (*split) {
      if (split_kind == "composed") split_kind = "primitive_plus_composed";
      spec.kind = scan::split_kind_from_string(split_kind);
      spec.target = scan::primitive_target_from_string(split_target);
      return run_split(spec, split_out);
    }
    if (*train) {
      return run_train(*train, train_mf, train_tf, train_config,
                       train_split_dir, train_resume, train_progress,
                       train_out);
    }
    if (*eval) {
      return run_eval(eval_ckpt, eval_data, eval_oracle, eval_audit,
                      eval_max_len, eval_out);
    }
    if (*analyze) {
      return run_neighbors(nb_ckpt, nb_pool, nb_probes, nb_k, nb_include_self,
                           nb_out);
    }
    if (*experiment) {
      if (exp_out.empty()) exp_out = root + "/" + exp_name;
      return run_experiment_cmd(*experiment, exp_mf, exp_tf, exp_config,
                                exp_name, exp_percents, exp_counts,
                                exp_workers, exp_out);
    }
    if (*sweep) {
      return run_sweep(*sweep, sweep_tf, sweep_config, sweep_name, sweep_cells,
                       sweep_layers, sweep_hidden, sweep_dropouts,
                       sweep_attention, sweep_workers, sweep_out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const scan::InvalidSpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
