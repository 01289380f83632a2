#include "scan/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <stdexcept>

#include "scan/grammar.hpp"

namespace scan {

std::string to_string(CellType cell) {
  switch (cell) {
    case CellType::kSrn:
      return "srn";
    case CellType::kLstm:
      return "lstm";
    case CellType::kGru:
      return "gru";
  }
  throw std::logic_error("unknown cell type");
}

CellType cell_type_from_string(const std::string& s) {
  if (s == "srn") return CellType::kSrn;
  if (s == "lstm") return CellType::kLstm;
  if (s == "gru") return CellType::kGru;
  throw std::invalid_argument("unknown cell type: " + s);
}

std::vector<std::size_t> TokenCodec::command_indices(
    const std::string& command) {
  std::vector<std::size_t> out;
  for (const std::string& tok : split_tokens(command)) {
    auto it = std::find(kCommandVocabulary.begin(), kCommandVocabulary.end(),
                        tok);
    if (it == kCommandVocabulary.end()) {
      throw IndexOutOfVocabularyError("unknown command word: " + tok);
    }
    out.push_back(std::size_t(it - kCommandVocabulary.begin()));
  }
  return out;
}

std::vector<std::size_t> TokenCodec::action_indices(
    const std::string& actions) {
  std::vector<std::size_t> out;
  for (const std::string& tok : split_tokens(actions)) {
    auto it = std::find(kActionNames.begin(), kActionNames.end(), tok);
    if (it == kActionNames.end()) {
      throw IndexOutOfVocabularyError("unknown action symbol: " + tok);
    }
    out.push_back(std::size_t(it - kActionNames.begin()));
  }
  return out;
}

std::string TokenCodec::action_text(std::span<const std::size_t> indices) {
  std::vector<std::string> toks;
  toks.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= kActionNames.size()) {
      throw IndexOutOfVocabularyError("not an action index: " +
                                      std::to_string(idx));
    }
    toks.emplace_back(kActionNames[idx]);
  }
  return join_tokens(toks);
}

void ModelConfig::validate() const {
  if (layers != 1 && layers != 2) {
    throw std::invalid_argument("layers must be 1 or 2");
  }
  if (hidden < 1) throw std::invalid_argument("hidden must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("dropout must be in [0, 1)");
  }
  // Two trailing special symbols (SOS, EOS) plus at least one real token.
  if (input_vocab < 3 || output_vocab < 3) {
    throw std::invalid_argument("vocabulary too small");
  }
}

std::string ModelConfig::name() const {
  char drop[16];
  std::snprintf(drop, sizeof drop, "%g", dropout);
  std::string out = to_string(cell) + "_l" + std::to_string(layers) + "_h" +
                    std::to_string(hidden) + "_d" + drop;
  if (attention) out += "_attn";
  return out;
}

std::vector<ModelConfig> full_grid() {
  std::vector<ModelConfig> grid;
  grid.reserve(180);
  for (CellType cell : {CellType::kSrn, CellType::kLstm, CellType::kGru}) {
    for (int layers : {1, 2}) {
      for (int hidden : {25, 50, 100, 200, 400}) {
        for (double dropout : {0.0, 0.1, 0.5}) {
          for (bool attention : {false, true}) {
            ModelConfig cfg;
            cfg.cell = cell;
            cfg.layers = layers;
            cfg.hidden = hidden;
            cfg.dropout = dropout;
            cfg.attention = attention;
            grid.push_back(cfg);
          }
        }
      }
    }
  }
  return grid;
}

Seq2SeqModel::Seq2SeqModel(const ModelConfig& cfg, std::uint64_t init_seed)
    : config_(cfg), init_seed_(init_seed), store_(tape_) {
  config_.validate();
  Rng init_rng(init_seed);
  register_params(init_rng);
  tape_.freeze_leaves();
}

Seq2SeqModel::CellParams Seq2SeqModel::register_cell(const std::string& prefix,
                                                     std::size_t input_dim,
                                                     Rng& rng) {
  const std::size_t h = std::size_t(config_.hidden);
  CellParams p;
  switch (config_.cell) {
    case CellType::kSrn:
      p.w = store_.add(prefix + ".w", h, input_dim, input_dim, rng);
      p.u = store_.add(prefix + ".u", h, h, h, rng);
      p.b = store_.add_zeros(prefix + ".b", h);
      break;
    case CellType::kLstm:
      // Fused gate pre-activations, row blocks [input; forget; output; cand].
      p.w = store_.add(prefix + ".w", 4 * h, input_dim, input_dim, rng);
      p.u = store_.add(prefix + ".u", 4 * h, h, h, rng);
      p.b = store_.add_zeros(prefix + ".b", 4 * h);
      break;
    case CellType::kGru:
      // Row blocks [update; reset], candidate path separate.
      p.w = store_.add(prefix + ".wzr", 2 * h, input_dim, input_dim, rng);
      p.u = store_.add(prefix + ".uzr", 2 * h, h, h, rng);
      p.b = store_.add_zeros(prefix + ".bzr", 2 * h);
      p.w2 = store_.add(prefix + ".wn", h, input_dim, input_dim, rng);
      p.u2 = store_.add(prefix + ".un", h, h, h, rng);
      p.b2 = store_.add_zeros(prefix + ".bn", h);
      break;
  }
  return p;
}

void Seq2SeqModel::register_params(Rng& rng) {
  const std::size_t h = std::size_t(config_.hidden);
  enc_embed_ = store_.add("enc.embed", config_.input_vocab, h, h, rng);
  for (int l = 0; l < config_.layers; ++l) {
    enc_cells_.push_back(register_cell("enc.l" + std::to_string(l), h, rng));
  }
  dec_embed_ = store_.add("dec.embed", config_.output_vocab, h, h, rng);
  // With attention the first decoder layer consumes [embedding; context].
  const std::size_t dec_in = config_.attention ? 2 * h : h;
  for (int l = 0; l < config_.layers; ++l) {
    dec_cells_.push_back(
        register_cell("dec.l" + std::to_string(l), l == 0 ? dec_in : h, rng));
  }
  if (config_.attention) {
    attn_w_ = store_.add("dec.attn.w", h, h, h, rng);
    attn_u_ = store_.add("dec.attn.u", h, h, h, rng);
    attn_v_ = store_.add("dec.attn.v", h, 1, h, rng);
  }
  const std::size_t proj_in = config_.attention ? 2 * h : h;
  out_w_ = store_.add("dec.out.w", config_.output_vocab, proj_in, proj_in, rng);
  out_b_ = store_.add_zeros("dec.out.b", config_.output_vocab);
}

NodeId Seq2SeqModel::cell_step(const CellParams& p, NodeId x, NodeId h_prev,
                               NodeId* c_inout) {
  const std::size_t h = std::size_t(config_.hidden);
  switch (config_.cell) {
    case CellType::kSrn:
      return tape_.tanh_of(tape_.affine2(p.w, x, p.u, h_prev, p.b));
    case CellType::kLstm: {
      NodeId pre = tape_.affine2(p.w, x, p.u, h_prev, p.b);
      NodeId gates = tape_.sigmoid(tape_.view(pre, 0, 3 * h));
      NodeId gi = tape_.view(gates, 0, h);
      NodeId gf = tape_.view(gates, h, h);
      NodeId go = tape_.view(gates, 2 * h, h);
      NodeId cand = tape_.tanh_of(tape_.view(pre, 3 * h, h));
      NodeId c = tape_.add(tape_.mul(gf, *c_inout), tape_.mul(gi, cand));
      *c_inout = c;
      return tape_.mul(go, tape_.tanh_of(c));
    }
    case CellType::kGru: {
      NodeId zr = tape_.sigmoid(tape_.affine2(p.w, x, p.u, h_prev, p.b));
      NodeId z = tape_.view(zr, 0, h);
      NodeId r = tape_.view(zr, h, h);
      NodeId cand = tape_.tanh_of(
          tape_.affine2(p.w2, x, p.u2, tape_.mul(r, h_prev), p.b2));
      // h' = (1 - z) h + z cand
      return tape_.add(h_prev, tape_.mul(z, tape_.sub(cand, h_prev)));
    }
  }
  throw std::logic_error("unknown cell type");
}

namespace {

void check_indices(std::span<const std::size_t> indices, std::size_t vocab,
                   const char* what) {
  for (std::size_t idx : indices) {
    if (idx >= vocab) {
      throw IndexOutOfVocabularyError(std::string(what) + " index " +
                                      std::to_string(idx) + " >= vocabulary " +
                                      std::to_string(vocab));
    }
  }
}

}  // namespace

Seq2SeqModel::EncodeResult Seq2SeqModel::encode(
    std::span<const std::size_t> command, bool training, Rng* dropout_rng) {
  check_indices(command, config_.input_vocab, "command");
  const bool drop = training && config_.dropout > 0.0;
  if (drop && dropout_rng == nullptr) {
    throw std::logic_error("training with dropout requires an rng");
  }
  tape_.reset();
  const std::size_t eos = config_.input_vocab - 1;
  NodeId zero = tape_.leaf(std::size_t(config_.hidden));
  std::vector<NodeId> h(std::size_t(config_.layers), zero);
  std::vector<NodeId> c(std::size_t(config_.layers), zero);

  EncodeResult out;
  out.top_states.reserve(command.size() + 1);
  for (std::size_t t = 0; t <= command.size(); ++t) {
    const std::size_t token = t < command.size() ? command[t] : eos;
    NodeId x = tape_.embedding(enc_embed_, token);
    if (drop) x = tape_.dropout(x, config_.dropout, *dropout_rng, true);
    for (int l = 0; l < config_.layers; ++l) {
      NodeId input = l == 0 ? x : h[l - 1];
      if (l > 0 && drop) {
        input = tape_.dropout(input, config_.dropout, *dropout_rng, true);
      }
      h[l] = cell_step(enc_cells_[l], input, h[l], &c[l]);
    }
    out.top_states.push_back(h.back());
  }
  out.final_h = h;
  if (config_.cell == CellType::kLstm) out.final_c = c;
  return out;
}

Seq2SeqModel::DecoderState Seq2SeqModel::initial_decoder_state(
    const EncodeResult& enc) const {
  DecoderState st;
  st.h = enc.final_h;
  if (config_.cell == CellType::kLstm) {
    st.c = enc.final_c;
  } else {
    st.c.assign(st.h.size(), kNoNode);
  }
  return st;
}

Seq2SeqModel::AttnCache Seq2SeqModel::build_attn_cache(
    std::span<const NodeId> encoder_states) {
  AttnCache cache;
  cache.h_mat = tape_.stack_rows(encoder_states);
  cache.uh = tape_.matmul_bt(cache.h_mat, attn_u_);
  return cache;
}

Seq2SeqModel::AttentionOut Seq2SeqModel::attend(const AttnCache& cache,
                                                NodeId g_prev_top) {
  NodeId q = tape_.matvec(attn_w_, g_prev_top);
  NodeId scores = tape_.matvec(tape_.tanh_of(tape_.rowwise_add(cache.uh, q)),
                               attn_v_);
  NodeId alpha = tape_.softmax(scores);
  NodeId context = tape_.matvec_t(cache.h_mat, alpha);
  return {context, alpha};
}

Seq2SeqModel::AttentionOut Seq2SeqModel::attention_context(
    NodeId g_prev_top, std::span<const NodeId> encoder_states) {
  if (!config_.attention) {
    throw std::logic_error("model was built without attention");
  }
  AttnCache cache = build_attn_cache(encoder_states);
  return attend(cache, g_prev_top);
}

NodeId Seq2SeqModel::decoder_logits(DecoderState& st, const AttnCache& cache,
                                    std::size_t prev_token, bool training,
                                    Rng* dropout_rng) {
  const bool drop = training && config_.dropout > 0.0;
  NodeId x = tape_.embedding(dec_embed_, prev_token);
  if (drop) x = tape_.dropout(x, config_.dropout, *dropout_rng, true);
  NodeId context = kNoNode;
  if (config_.attention) {
    AttentionOut att = attend(cache, st.h.back());
    context = att.context;
    x = tape_.concat(x, context);
  }
  for (int l = 0; l < config_.layers; ++l) {
    NodeId input = l == 0 ? x : st.h[l - 1];
    if (l > 0 && drop) {
      input = tape_.dropout(input, config_.dropout, *dropout_rng, true);
    }
    st.h[l] = cell_step(dec_cells_[l], input, st.h[l], &st.c[l]);
  }
  NodeId proj_in =
      config_.attention ? tape_.concat(st.h.back(), context) : st.h.back();
  return tape_.add(tape_.matvec(out_w_, proj_in), out_b_);
}

std::size_t Seq2SeqModel::argmax_logit(NodeId logits, bool actions_only) const {
  const double* v = tape_.value(logits);
  // Specials (SOS, EOS) occupy the last two output indices.
  const std::size_t n =
      actions_only ? config_.output_vocab - 2 : config_.output_vocab;
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

NodeId Seq2SeqModel::decode_loss(const EncodeResult& enc,
                                 std::span<const std::size_t> target,
                                 bool teacher_forcing, bool training,
                                 Rng* dropout_rng) {
  check_indices(target, config_.output_vocab, "target");
  const bool drop = training && config_.dropout > 0.0;
  if (drop && dropout_rng == nullptr) {
    throw std::logic_error("training with dropout requires an rng");
  }
  AttnCache cache;
  if (config_.attention) cache = build_attn_cache(enc.top_states);
  DecoderState st = initial_decoder_state(enc);
  const std::size_t sos = config_.output_vocab - 2;
  const std::size_t eos = config_.output_vocab - 1;

  std::vector<NodeId> terms;
  terms.reserve(target.size() + 1);
  std::size_t prev = sos;
  for (std::size_t i = 0; i <= target.size(); ++i) {
    const std::size_t tgt = i < target.size() ? target[i] : eos;
    NodeId logits = decoder_logits(st, cache, prev, training, dropout_rng);
    terms.push_back(tape_.cross_entropy_logits(logits, tgt));
    prev = teacher_forcing ? tgt : argmax_logit(logits, false);
  }
  return tape_.scale(tape_.sum_many(terms), 1.0 / double(terms.size()));
}

Seq2SeqModel::GreedyResult Seq2SeqModel::decode_greedy(const EncodeResult& enc,
                                                       std::size_t max_len) {
  AttnCache cache;
  if (config_.attention) cache = build_attn_cache(enc.top_states);
  DecoderState st = initial_decoder_state(enc);
  const std::size_t sos = config_.output_vocab - 2;
  const std::size_t eos = config_.output_vocab - 1;

  GreedyResult out;
  std::size_t prev = sos;
  for (std::size_t i = 0; i < max_len; ++i) {
    NodeId logits = decoder_logits(st, cache, prev, false, nullptr);
    const std::size_t sym = argmax_logit(logits, false);
    if (sym == eos) return out;
    out.actions.push_back(sym);
    prev = sym;
  }
  out.truncated = true;
  return out;
}

Seq2SeqModel::GreedyResult Seq2SeqModel::decode_fixed_length(
    const EncodeResult& enc, std::size_t length) {
  AttnCache cache;
  if (config_.attention) cache = build_attn_cache(enc.top_states);
  DecoderState st = initial_decoder_state(enc);
  const std::size_t sos = config_.output_vocab - 2;

  GreedyResult out;
  std::size_t prev = sos;
  for (std::size_t i = 0; i < length; ++i) {
    NodeId logits = decoder_logits(st, cache, prev, false, nullptr);
    const std::size_t sym = argmax_logit(logits, true);
    out.actions.push_back(sym);
    prev = sym;
  }
  return out;
}

std::vector<std::vector<double>> Seq2SeqModel::step_log_distributions(
    std::span<const std::size_t> command,
    std::span<const std::size_t> target) {
  check_indices(target, config_.output_vocab, "target");
  EncodeResult enc = encode(command, false, nullptr);
  AttnCache cache;
  if (config_.attention) cache = build_attn_cache(enc.top_states);
  DecoderState st = initial_decoder_state(enc);
  const std::size_t sos = config_.output_vocab - 2;
  const std::size_t eos = config_.output_vocab - 1;
  const std::size_t n = config_.output_vocab;

  std::vector<std::vector<double>> rows;
  rows.reserve(target.size() + 1);
  std::size_t prev = sos;
  for (std::size_t i = 0; i <= target.size(); ++i) {
    NodeId logits = decoder_logits(st, cache, prev, false, nullptr);
    const double* v = tape_.value(logits);
    const double mx = *std::max_element(v, v + n);
    double lse = 0.0;
    for (std::size_t k = 0; k < n; ++k) lse += std::exp(v[k] - mx);
    const double log_z = mx + std::log(lse);
    std::vector<double> row(n);
    for (std::size_t k = 0; k < n; ++k) row[k] = v[k] - log_z;
    rows.push_back(std::move(row));
    prev = i < target.size() ? target[i] : eos;
  }
  return rows;
}

double Seq2SeqModel::log_likelihood(std::span<const std::size_t> command,
                                    std::span<const std::size_t> target) {
  const auto rows = step_log_distributions(command, target);
  const std::size_t eos = config_.output_vocab - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    total += rows[i][i < target.size() ? target[i] : eos];
  }
  return total;
}

NodeId Seq2SeqModel::training_loss(std::span<const std::size_t> command,
                                   std::span<const std::size_t> target,
                                   bool teacher_forcing, Rng* dropout_rng) {
  EncodeResult enc = encode(command, true, dropout_rng);
  return decode_loss(enc, target, teacher_forcing, true, dropout_rng);
}

Seq2SeqModel::GreedyResult Seq2SeqModel::predict(
    std::span<const std::size_t> command, std::size_t max_len) {
  return decode_greedy(encode(command, false, nullptr), max_len);
}

Seq2SeqModel::GreedyResult Seq2SeqModel::predict_fixed_length(
    std::span<const std::size_t> command, std::size_t length) {
  return decode_fixed_length(encode(command, false, nullptr), length);
}

std::vector<double> Seq2SeqModel::encoder_summary(
    std::span<const std::size_t> command) {
  EncodeResult enc = encode(command, false, nullptr);
  std::vector<double> out;
  out.reserve(std::size_t(config_.layers) * std::size_t(config_.hidden));
  for (NodeId layer : enc.final_h) {
    const double* v = tape_.value(layer);
    out.insert(out.end(), v, v + tape_.size(layer));
  }
  return out;
}

}  // namespace scan
