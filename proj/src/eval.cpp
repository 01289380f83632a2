#include "scan/eval.hpp"

#include <algorithm>
#include <stdexcept>

#include "scan/tensor.hpp"

namespace scan {

std::vector<EncodedPair> encode_pairs(const std::vector<ScanPair>& pairs) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const ScanPair& p : pairs) {
    out.push_back({p.command, p.actions, TokenCodec::command_indices(p.command),
                   TokenCodec::action_indices(p.actions)});
  }
  return out;
}

namespace {

void bucket(std::map<int, LengthBucket>& m, int key, bool correct) {
  LengthBucket& b = m[key];
  ++b.total;
  b.correct += correct;
}

}  // namespace

EvalReport evaluate(Seq2SeqModel& model, const std::vector<EncodedPair>& pairs,
                    std::size_t max_len) {
  EvalReport r;
  for (const EncodedPair& p : pairs) {
    const auto out = model.predict(p.command_idx, max_len);
    const bool correct = !out.truncated && out.actions == p.action_idx;
    r.truncations += out.truncated;
    r.correct += correct;
    ++r.total;
    bucket(r.by_action_length, int(p.action_idx.size()), correct);
    bucket(r.by_command_length, int(p.command_idx.size()), correct);
  }
  r.accuracy = r.total ? double(r.correct) / r.total : 0.0;
  return r;
}

EvalReport evaluate_with_length_oracle(Seq2SeqModel& model,
                                       const std::vector<EncodedPair>& pairs,
                                       std::size_t max_len) {
  EvalReport r;
  int oracle_correct = 0;
  for (const EncodedPair& p : pairs) {
    const auto out = model.predict(p.command_idx, max_len);
    const bool correct = !out.truncated && out.actions == p.action_idx;
    r.truncations += out.truncated;
    r.correct += correct;
    ++r.total;
    bucket(r.by_action_length, int(p.action_idx.size()), correct);
    bucket(r.by_command_length, int(p.command_idx.size()), correct);

    // A plain-correct pair stays correct under EOS suppression: the forced
    // rollout sees the same prefixes, so it picks the same actions.
    bool oracle_ok = correct;
    if (!correct) {
      const auto forced =
          model.predict_fixed_length(p.command_idx, p.action_idx.size());
      oracle_ok = forced.actions == p.action_idx;
    }
    oracle_correct += oracle_ok;
    bucket(r.oracle_by_action_length, int(p.action_idx.size()), oracle_ok);
  }
  r.accuracy = r.total ? double(r.correct) / r.total : 0.0;
  r.oracle_accuracy = r.total ? double(oracle_correct) / r.total : 0.0;
  return r;
}

int search_failure_audit(Seq2SeqModel& model,
                         const std::vector<EncodedPair>& pairs,
                         std::size_t max_len) {
  int failures = 0;
  for (const EncodedPair& p : pairs) {
    const auto out = model.predict(p.command_idx, max_len);
    if (!out.truncated && out.actions == p.action_idx) continue;
    const double ll_own = model.log_likelihood(p.command_idx, out.actions);
    const double ll_truth = model.log_likelihood(p.command_idx, p.action_idx);
    failures += ll_truth > ll_own;
  }
  return failures;
}

std::vector<Neighbor> nearest_neighbors(Seq2SeqModel& model,
                                        const std::string& probe_command,
                                        const std::vector<std::string>& pool,
                                        std::size_t k, bool exclude_self) {
  if (pool.empty()) throw std::invalid_argument("empty neighbor pool");
  const auto probe =
      model.encoder_summary(TokenCodec::command_indices(probe_command));
  if (l2_norm(probe) == 0.0) {
    throw std::invalid_argument("zero probe state: " + probe_command);
  }

  std::vector<Neighbor> scored;
  scored.reserve(pool.size());
  for (const std::string& cmd : pool) {
    if (exclude_self && cmd == probe_command) continue;
    const auto state = model.encoder_summary(TokenCodec::command_indices(cmd));
    if (l2_norm(state) == 0.0) {
      throw std::invalid_argument("zero pool state: " + cmd);
    }
    scored.push_back({cmd, cosine(probe, state)});
  }
  std::sort(scored.begin(), scored.end(),
            [](const Neighbor& a, const Neighbor& b) {
              if (a.cosine != b.cosine) return a.cosine > b.cosine;
              return a.command < b.command;
            });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

}  // namespace scan
