#pragma once

// Model checkpoints: one file holding a JSON header (architecture, train
// config, progress counters, RNG stream states, parameter table) followed
// by the raw parameter and ADAM moment values. Restoring rebuilds the model
// and, for an interrupted run, lets training continue bit-exactly.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scan/model.hpp"
#include "scan/train.hpp"

namespace scan {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamBlob {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

struct Checkpoint {
  ModelConfig config;
  TrainConfig tc;
  std::uint64_t steps_done = 0;
  std::uint64_t adam_steps = 0;
  std::vector<ParamBlob> params;
  std::vector<double> moment1, moment2;
  // Serialized mt19937_64 states of the training streams.
  std::string present_state, teacher_state, dropout_state;
};

// Captures the trainable state of a model mid-run. RNG states come from
// TrainResult (or are empty for an eval-only snapshot).
Checkpoint snapshot(const Seq2SeqModel& model, const TrainConfig& tc,
                    std::uint64_t steps_done, const std::string& present_state,
                    const std::string& teacher_state,
                    const std::string& dropout_state);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the architecture and overwrites parameters and ADAM moments from
// the checkpoint. Name or shape mismatches throw CheckpointError.
std::unique_ptr<Seq2SeqModel> restore_model(const Checkpoint& ckpt);

}  // namespace scan
