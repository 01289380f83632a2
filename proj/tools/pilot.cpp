// End-to-end probe of one training run: trains a config on a split and
// prints accuracy. Usage:
//   scan_pilot [steps] [seed] [split] [cell] [layers] [hidden] [dropout]
//              [attention]
// split: random | coverage<N> | length | jump | turn_left | composed<N>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "scan/eval.hpp"
#include "scan/grammar.hpp"
#include "scan/splits.hpp"
#include "scan/train.hpp"

using namespace scan;

int main(int argc, char** argv) {
  TrainConfig tc;
  tc.steps = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 100000;
  tc.seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 0;
  const std::string split_name = argc > 3 ? argv[3] : "random";

  ModelConfig cfg;
  cfg.cell = argc > 4 ? cell_type_from_string(argv[4]) : CellType::kLstm;
  cfg.layers = argc > 5 ? std::atoi(argv[5]) : 2;
  cfg.hidden = argc > 6 ? std::atoi(argv[6]) : 200;
  cfg.dropout = argc > 7 ? std::atof(argv[7]) : 0.5;
  cfg.attention = argc > 8 && std::atoi(argv[8]) != 0;

  SplitSpec spec;
  spec.seed = tc.seed;
  if (split_name == "random") {
    spec.kind = SplitKind::kRandom;
  } else if (split_name.rfind("coverage", 0) == 0) {
    spec.kind = SplitKind::kCoverage;
    spec.coverage_percent = std::atoi(split_name.c_str() + 8);
  } else if (split_name == "length") {
    spec.kind = SplitKind::kLength;
  } else if (split_name == "jump") {
    spec.kind = SplitKind::kPrimitive;
    spec.target = PrimitiveTarget::kJump;
  } else if (split_name == "turn_left") {
    spec.kind = SplitKind::kPrimitive;
    spec.target = PrimitiveTarget::kTurnLeft;
  } else if (split_name.rfind("composed", 0) == 0) {
    spec.kind = SplitKind::kPrimitivePlusComposed;
    spec.target = PrimitiveTarget::kJump;
    spec.num_composed = std::atoi(split_name.c_str() + 8);
  } else {
    std::fprintf(stderr, "unknown split %s\n", split_name.c_str());
    return 1;
  }

  const auto data = build_dataset();
  const Split split = build_split(data, spec);
  std::printf("split %s train %zu test %zu | model %s | steps %llu seed %llu\n",
              split.spec.name().c_str(), split.train.size(), split.test.size(),
              cfg.name().c_str(), (unsigned long long)tc.steps,
              (unsigned long long)tc.seed);
  std::fflush(stdout);

  TrainResult run = train(
      cfg, split, tc,
      [](std::uint64_t step, double loss) {
        std::printf("step %llu mean loss %.4f\n", (unsigned long long)step,
                    loss);
        std::fflush(stdout);
      },
      2000);
  std::printf("trained in %.1f s (%.2f ms/step)\n", run.wall_seconds,
              1000.0 * run.wall_seconds / double(tc.steps));

  const auto train_pairs = encode_pairs(split.train);
  const auto test_pairs = encode_pairs(split.test);
  const EvalReport train_rep = evaluate(*run.model, train_pairs);
  std::printf("train accuracy %.4f (%d/%d, %d truncated)\n",
              train_rep.accuracy, train_rep.correct, train_rep.total,
              train_rep.truncations);
  const EvalReport test_rep = evaluate_with_length_oracle(*run.model,
                                                          test_pairs);
  std::printf("test accuracy %.4f (%d/%d, %d truncated) oracle %.4f\n",
              test_rep.accuracy, test_rep.correct, test_rep.total,
              test_rep.truncations, test_rep.oracle_accuracy);
  const int failures = search_failure_audit(*run.model, test_pairs);
  std::printf("search failures %d\n", failures);
  return 0;
}
