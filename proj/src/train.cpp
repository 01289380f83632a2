#include "scan/train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "scan/checkpoint.hpp"
#include "scan/eval.hpp"
#include "scan/optim.hpp"
#include "scan/rng.hpp"

namespace scan {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (clip_norm <= 0.0) {
    throw std::invalid_argument("clip norm must be positive");
  }
  if (!(teacher_forcing_prob >= 0.0 && teacher_forcing_prob <= 1.0)) {
    throw std::invalid_argument("teacher forcing probability must be in [0,1]");
  }
  if (replication_count < 1) {
    throw std::invalid_argument("replication count must be at least 1");
  }
}

namespace {

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_state(const std::string& state) {
  Rng rng(0);
  std::istringstream is(state);
  is >> rng;
  if (!is) throw std::runtime_error("malformed rng state");
  return rng;
}

TrainResult run_training(std::unique_ptr<Seq2SeqModel> owned,
                         const Split& split, const TrainConfig& tc,
                         std::uint64_t first_step, Rng present_rng,
                         Rng teacher_rng, Rng dropout_rng,
                         const ProgressFn& progress,
                         std::uint64_t progress_every) {
  TrainResult result;
  result.model = std::move(owned);
  Seq2SeqModel& model = *result.model;

  const std::vector<EncodedPair> pairs = encode_pairs(split.train);
  AdamConfig adam;
  adam.lr = tc.learning_rate;

  const auto t0 = std::chrono::steady_clock::now();
  double window_sum = 0.0;
  std::uint64_t window_count = 0;
  for (std::uint64_t step = first_step; step <= tc.steps; ++step) {
    const std::size_t pick = sample_presentation_index(split, present_rng);
    const EncodedPair& pair = pairs[pick];
    const bool teacher = teacher_rng.next_bernoulli(tc.teacher_forcing_prob);

    NodeId loss_node = model.training_loss(pair.command_idx, pair.action_idx,
                                           teacher, &dropout_rng);
    const double loss = *model.tape().value(loss_node);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("non-finite loss at step " +
                               std::to_string(step) + " on '" + pair.command +
                               "' (" + model.config().name() + ")");
    }
    model.tape().backward(loss_node);
    model.store().clip_gradients(tc.clip_norm);
    model.store().adam_step(adam);

    window_sum += loss;
    ++window_count;
    if (step % 100 == 0 || step == tc.steps) {
      result.loss_curve.emplace_back(step, loss);
    }
    if (progress && progress_every && step % progress_every == 0) {
      progress(step, window_sum / double(window_count));
      window_sum = 0.0;
      window_count = 0;
    }
  }
  result.steps_run = tc.steps >= first_step ? tc.steps - first_step + 1 : 0;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  result.present_state = rng_state(present_rng);
  result.teacher_state = rng_state(teacher_rng);
  result.dropout_state = rng_state(dropout_rng);
  return result;
}

}  // namespace

TrainResult train(const ModelConfig& cfg, const Split& split,
                  const TrainConfig& tc, const ProgressFn& progress,
                  std::uint64_t progress_every) {
  cfg.validate();
  tc.validate();
  if (split.train.empty()) {
    throw std::invalid_argument("split has no training pairs");
  }
  // Stream indices under the run seed: 0 init, 1 presentation order,
  // 2 teacher-forcing draws, 3 dropout masks.
  auto model = std::make_unique<Seq2SeqModel>(cfg, derive_seed(tc.seed, 0));
  return run_training(std::move(model), split, tc, 1,
                      Rng(derive_seed(tc.seed, 1)),
                      Rng(derive_seed(tc.seed, 2)),
                      Rng(derive_seed(tc.seed, 3)), progress, progress_every);
}

TrainResult resume_training(const Checkpoint& ckpt, const Split& split,
                            const ProgressFn& progress,
                            std::uint64_t progress_every) {
  ckpt.config.validate();
  ckpt.tc.validate();
  if (split.train.empty()) {
    throw std::invalid_argument("split has no training pairs");
  }
  return run_training(restore_model(ckpt), split, ckpt.tc,
                      ckpt.steps_done + 1,
                      rng_from_state(ckpt.present_state),
                      rng_from_state(ckpt.teacher_state),
                      rng_from_state(ckpt.dropout_state), progress,
                      progress_every);
}

}  // namespace scan
