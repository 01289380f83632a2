#pragma once

// Single-run training loop: sampled single-pair presentations with
// per-trial teacher forcing, mean cross-entropy over target actions + EOS,
// global-norm clipping, and ADAM. One run seed derives the initialization,
// presentation, teacher-forcing, and dropout streams, so a logged seed
// reproduces the run bit-exactly.

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "scan/model.hpp"
#include "scan/splits.hpp"

namespace scan {

struct TrainConfig {
  std::uint64_t steps = 100000;
  double learning_rate = 0.001;
  double clip_norm = 5.0;
  double teacher_forcing_prob = 0.5;
  std::uint64_t seed = 0;
  int replication_count = 5;

  void validate() const;
};

struct TrainResult {
  std::unique_ptr<Seq2SeqModel> model;
  // (step, loss) every 100 steps plus the final step.
  std::vector<std::pair<std::uint64_t, double>> loss_curve;
  std::uint64_t steps_run = 0;
  double wall_seconds = 0.0;
  // End-of-run stream states, checkpointable for bit-exact continuation.
  std::string present_state, teacher_state, dropout_state;
};

// Called every `progress_every` steps when set; receives (step, recent mean
// loss over the window).
using ProgressFn = std::function<void(std::uint64_t, double)>;

// Trains cfg on split.train for tc.steps presentations. steps = 0 returns
// the freshly initialized model unchanged. A non-finite loss aborts with a
// diagnostic naming the step and presented command.
TrainResult train(const ModelConfig& cfg, const Split& split,
                  const TrainConfig& tc, const ProgressFn& progress = nullptr,
                  std::uint64_t progress_every = 0);

struct Checkpoint;

// Continues an interrupted run from a checkpoint until ckpt.tc.steps,
// bit-identical to a run that was never interrupted.
TrainResult resume_training(const Checkpoint& ckpt, const Split& split,
                            const ProgressFn& progress = nullptr,
                            std::uint64_t progress_every = 0);

}  // namespace scan
