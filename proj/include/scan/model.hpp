#pragma once

// Recurrent encoder-decoder models over command/action token sequences:
// SRN, LSTM, or GRU cells, 1-2 layers, optional additive attention in the
// decoder. One model owns one tape; recording public ops is define-by-run.
//
// Call pattern: encode() resets the tape and records the encoder pass; the
// decode_* / attention ops record on top of its result without resetting.
// The convenience wrappers (training_loss, predict, log_likelihood,
// encoder_summary) each perform one full reset+encode+decode round.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scan/optim.hpp"
#include "scan/rng.hpp"
#include "scan/tape.hpp"

namespace scan {

struct IndexOutOfVocabularyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CellType : std::uint8_t { kSrn = 0, kLstm, kGru };

std::string to_string(CellType cell);
CellType cell_type_from_string(const std::string& s);

// Token index layout. Inputs: the 13 command words in alphabetical order,
// then SOS, then EOS. Outputs: the 6 action symbols, then SOS, then EOS.
struct TokenCodec {
  static constexpr std::size_t kInputVocab = 15;
  static constexpr std::size_t kInputSos = 13;
  static constexpr std::size_t kInputEos = 14;
  static constexpr std::size_t kOutputVocab = 8;
  static constexpr std::size_t kOutputSos = 6;
  static constexpr std::size_t kOutputEos = 7;

  static std::vector<std::size_t> command_indices(const std::string& command);
  static std::vector<std::size_t> action_indices(const std::string& actions);
  // Inverse of action_indices; rejects special symbols.
  static std::string action_text(std::span<const std::size_t> indices);
};

struct ModelConfig {
  CellType cell = CellType::kLstm;
  int layers = 2;
  int hidden = 200;  // embedding dimension equals hidden
  double dropout = 0.5;
  bool attention = false;
  std::size_t input_vocab = TokenCodec::kInputVocab;
  std::size_t output_vocab = TokenCodec::kOutputVocab;

  void validate() const;
  std::string name() const;  // e.g. "lstm_l2_h200_d0.5" or "..._attn"
  bool operator==(const ModelConfig&) const = default;
};

// The full architecture search grid: 3 cells x 2 layer counts x 5 hidden
// sizes x 3 dropout rates x attention on/off = 180 configs.
std::vector<ModelConfig> full_grid();

class Seq2SeqModel {
 public:
  Seq2SeqModel(const ModelConfig& cfg, std::uint64_t init_seed);
  // The store points into the member tape; pin the object in place.
  Seq2SeqModel(const Seq2SeqModel&) = delete;
  Seq2SeqModel& operator=(const Seq2SeqModel&) = delete;

  struct EncodeResult {
    std::vector<NodeId> top_states;  // h_1..h_T of the last layer, T = len+1
    std::vector<NodeId> final_h;     // final state per layer
    std::vector<NodeId> final_c;     // final cell state per layer (LSTM)
  };

  struct GreedyResult {
    std::vector<std::size_t> actions;  // output-vocab indices, specials excluded
    bool truncated = false;            // hit max_len before EOS
  };

  // Embeds command words, appends EOS, runs the stacked recurrence.
  // Resets the tape first. Dropout only when training (rng required then).
  EncodeResult encode(std::span<const std::size_t> command,
                      bool training = false, Rng* dropout_rng = nullptr);

  // Teacher-forced or self-fed decoding of `target` (+EOS), returning the
  // mean cross-entropy node. Records on top of encode()'s graph.
  NodeId decode_loss(const EncodeResult& enc,
                     std::span<const std::size_t> target, bool teacher_forcing,
                     bool training = false, Rng* dropout_rng = nullptr);

  // Greedy argmax decoding from SOS until EOS or max_len.
  GreedyResult decode_greedy(const EncodeResult& enc, std::size_t max_len = 64);

  // Greedy decoding constrained to emit exactly `length` actions: EOS (and
  // SOS) are excluded from the argmax until the target length is reached.
  GreedyResult decode_fixed_length(const EncodeResult& enc, std::size_t length);

  // Additive attention over the last-layer encoder states, from the previous
  // top-layer decoder state. Returns {context, weights}.
  struct AttentionOut {
    NodeId context;
    NodeId weights;
  };
  AttentionOut attention_context(NodeId g_prev_top,
                                 std::span<const NodeId> encoder_states);

  // Sum of log-probabilities of each target action plus EOS under
  // teacher forcing, evaluation mode. Always <= 0.
  double log_likelihood(std::span<const std::size_t> command,
                        std::span<const std::size_t> target);

  // Full log-probability vector at each teacher-forced decode step
  // (len(target)+1 rows of output_vocab entries, the last row conditioning
  // EOS). log_likelihood sums the target entries of these rows.
  std::vector<std::vector<double>> step_log_distributions(
      std::span<const std::size_t> command,
      std::span<const std::size_t> target);

  // One-call training pass: reset, encode, decode_loss.
  NodeId training_loss(std::span<const std::size_t> command,
                       std::span<const std::size_t> target,
                       bool teacher_forcing, Rng* dropout_rng);

  // One-call evaluation pass: reset, encode, greedy decode.
  GreedyResult predict(std::span<const std::size_t> command,
                       std::size_t max_len = 64);
  GreedyResult predict_fixed_length(std::span<const std::size_t> command,
                                    std::size_t length);

  // Concatenated final encoder state across layers, evaluation mode.
  // The similarity probe vector for nearest-neighbor tables.
  std::vector<double> encoder_summary(std::span<const std::size_t> command);

  const ModelConfig& config() const { return config_; }
  Tape& tape() { return tape_; }
  const Tape& tape() const { return tape_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }
  std::uint64_t init_seed() const { return init_seed_; }
  std::size_t parameter_count() const { return store_.total_size(); }

 private:
  struct CellParams {
    NodeId w = kNoNode, u = kNoNode, b = kNoNode;        // srn/lstm fused
    NodeId w2 = kNoNode, u2 = kNoNode, b2 = kNoNode;     // gru candidate path
  };
  struct AttnCache {
    NodeId h_mat = kNoNode;  // T x hidden
    NodeId uh = kNoNode;     // T x hidden, U_a h_t rows
  };
  struct DecoderState {
    std::vector<NodeId> h, c;
  };

  void register_params(Rng& init_rng);
  CellParams register_cell(const std::string& prefix, std::size_t input_dim,
                           Rng& rng);
  // One recurrence step; writes the new cell state for LSTM.
  NodeId cell_step(const CellParams& p, NodeId x, NodeId h_prev,
                   NodeId* c_inout);
  AttnCache build_attn_cache(std::span<const NodeId> encoder_states);
  AttentionOut attend(const AttnCache& cache, NodeId g_prev_top);
  // Runs embeddings + stacked cells + projection for one decoder step.
  NodeId decoder_logits(DecoderState& st, const AttnCache& cache,
                        std::size_t prev_token, bool training,
                        Rng* dropout_rng);
  DecoderState initial_decoder_state(const EncodeResult& enc) const;
  std::size_t argmax_logit(NodeId logits, bool actions_only) const;

  ModelConfig config_;
  std::uint64_t init_seed_;
  Tape tape_;
  ParamStore store_;
  NodeId enc_embed_ = kNoNode;
  NodeId dec_embed_ = kNoNode;
  std::vector<CellParams> enc_cells_, dec_cells_;
  NodeId attn_w_ = kNoNode, attn_u_ = kNoNode, attn_v_ = kNoNode;
  NodeId out_w_ = kNoNode, out_b_ = kNoNode;
};

}  // namespace scan
