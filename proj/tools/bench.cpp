// Training-step throughput probe: full forward/backward/clip/ADAM rounds on
// a realistic pair mix. Usage: scan_bench [steps] [hidden] [layers] [cell]
// [attention(0|1)].

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "scan/grammar.hpp"
#include "scan/model.hpp"
#include "scan/optim.hpp"
#include "scan/rng.hpp"
#include "scan/splits.hpp"

using namespace scan;

int main(int argc, char** argv) {
  const int steps = argc > 1 ? std::atoi(argv[1]) : 500;
  ModelConfig cfg;
  cfg.cell = CellType::kLstm;
  cfg.layers = 2;
  cfg.hidden = argc > 2 ? std::atoi(argv[2]) : 200;
  if (argc > 3) cfg.layers = std::atoi(argv[3]);
  if (argc > 4) cfg.cell = cell_type_from_string(argv[4]);
  cfg.attention = argc > 5 && std::atoi(argv[5]) != 0;
  cfg.dropout = 0.5;

  const std::vector<ScanPair> data = build_dataset();
  SplitSpec spec;
  spec.kind = SplitKind::kRandom;
  spec.seed = 1;
  const Split split = build_split(data, spec);

  Seq2SeqModel model(cfg, 1);
  AdamConfig adam;
  Rng rng(2);
  std::fprintf(stderr, "config %s params %zu train pairs %zu\n",
               cfg.name().c_str(), model.parameter_count(),
               split.train.size());

  std::vector<std::vector<std::size_t>> cmds, tgts;
  for (const ScanPair& pair : split.train) {
    cmds.push_back(TokenCodec::command_indices(pair.command));
    tgts.push_back(TokenCodec::action_indices(pair.actions));
  }

  // mode: 0 full step, 1 skip optimizer, 2 forward only
  const int mode = argc > 6 ? std::atoi(argv[6]) : 0;
  double loss_sum = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int s = 0; s < steps; ++s) {
    const std::size_t pick = sample_presentation_index(split, rng);
    const bool teacher = rng.next_bernoulli(0.5);
    NodeId loss = model.training_loss(cmds[pick], tgts[pick], teacher, &rng);
    loss_sum += *model.tape().value(loss);
    if (mode >= 2) continue;
    model.tape().backward(loss);
    if (mode >= 1) {
      model.tape().zero_all_grads();
      continue;
    }
    model.store().clip_gradients(5.0);
    model.store().adam_step(adam);
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count() / steps;
  std::printf("%d steps, %.3f ms/step, %.1f s per 100k, mean loss %.4f\n",
              steps, ms, ms * 100000 / 1000.0, loss_sum / steps);
  return 0;
}
