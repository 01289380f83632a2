#pragma once

// Exact-match evaluation with per-length breakdowns, length-oracle decoding,
// the greedy-search audit, and encoder-state nearest-neighbor tables.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "scan/grammar.hpp"
#include "scan/model.hpp"

namespace scan {

// A dataset pair pre-encoded to token indices, kept beside the text forms.
struct EncodedPair {
  std::string command;
  std::string actions;
  std::vector<std::size_t> command_idx;
  std::vector<std::size_t> action_idx;
};

std::vector<EncodedPair> encode_pairs(const std::vector<ScanPair>& pairs);

struct LengthBucket {
  int correct = 0;
  int total = 0;
  double accuracy() const { return total ? double(correct) / total : 0.0; }
};

struct EvalReport {
  double accuracy = 0.0;
  std::map<int, LengthBucket> by_action_length;
  std::map<int, LengthBucket> by_command_length;
  int correct = 0;
  int total = 0;
  int truncations = 0;
  // Filled by evaluate_with_length_oracle; negative means not computed.
  double oracle_accuracy = -1.0;
  std::map<int, LengthBucket> oracle_by_action_length;
  // Filled by search_failure_audit; negative means not audited.
  int search_failures = -1;
};

// Greedy decode every pair; correct iff the decoded action indices equal
// the target exactly. Buckets by target action length and command length.
EvalReport evaluate(Seq2SeqModel& model, const std::vector<EncodedPair>& pairs,
                    std::size_t max_len = 64);

// evaluate() plus a second pass where EOS is suppressed until the target
// length is reached. Pairs the plain decode already got right are counted
// correct without re-decoding (suppression cannot unmatch them).
EvalReport evaluate_with_length_oracle(Seq2SeqModel& model,
                                       const std::vector<EncodedPair>& pairs,
                                       std::size_t max_len = 64);

// Counts erroneous pairs where the ground truth scores a strictly higher
// sequence log-likelihood than the model's own greedy output.
int search_failure_audit(Seq2SeqModel& model,
                         const std::vector<EncodedPair>& pairs,
                         std::size_t max_len = 64);

struct Neighbor {
  std::string command;
  double cosine = 0.0;
};

// Top-k pool commands by cosine between concatenated final encoder states.
// Ties break lexicographically by command. A zero summary vector (probe or
// pool entry) is rejected.
std::vector<Neighbor> nearest_neighbors(Seq2SeqModel& model,
                                        const std::string& probe_command,
                                        const std::vector<std::string>& pool,
                                        std::size_t k = 5,
                                        bool exclude_self = true);

}  // namespace scan
