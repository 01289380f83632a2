#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "scan/eval.hpp"
#include "scan/grammar.hpp"
#include "scan/model.hpp"
#include "scan/optim.hpp"
#include "scan/splits.hpp"
#include "scan/train.hpp"
#include "test_util.hpp"

using namespace scan;
using scan_test::full_dataset;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.cell = CellType::kLstm;
  cfg.layers = 1;
  cfg.hidden = 16;
  cfg.dropout = 0.0;
  cfg.attention = false;
  return cfg;
}

std::vector<ScanPair> pairs_by_command(const std::vector<std::string>& cmds) {
  std::vector<ScanPair> out;
  for (const std::string& c : cmds) {
    const auto it =
        std::find_if(full_dataset().begin(), full_dataset().end(),
                     [&](const ScanPair& p) { return p.command == c; });
    REQUIRE(it != full_dataset().end());
    out.push_back(*it);
  }
  return out;
}

std::vector<ScanPair> dataset_sample(std::size_t stride, std::size_t count) {
  std::vector<ScanPair> out;
  for (std::size_t i = 0; i < full_dataset().size() && out.size() < count;
       i += stride) {
    out.push_back(full_dataset()[i]);
  }
  return out;
}

void zero_all_params(Seq2SeqModel& m) {
  for (const ParamInfo& p : m.store().params()) {
    double* v = m.tape().value(p.node);
    std::fill(v, v + p.rows * p.cols, 0.0);
  }
}

// Zero parameters except a huge logit bias on action `idx`: greedy emits
// that action forever (EOS never wins), so every decode truncates.
void rig_constant_emitter(Seq2SeqModel& m, std::size_t idx) {
  zero_all_params(m);
  m.tape().value(m.store().find("dec.out.b"))[idx] = 100.0;
}

Split memorization_split() {
  Split split;
  split.train = pairs_by_command(
      {"jump", "walk", "run left", "look twice", "jump right",
       "walk and run", "turn left", "look opposite right"});
  split.presentation_weights.assign(split.train.size(),
                                    1.0 / split.train.size());
  split.rebuild_cumulative();
  return split;
}

// One small model trained to memorize eight pairs, shared across cases.
const TrainResult& memorized() {
  static const TrainResult result = [] {
    ModelConfig cfg = small_config();
    cfg.hidden = 32;
    TrainConfig tc;
    tc.steps = 3000;
    tc.seed = 5;
    return train(cfg, memorization_split(), tc);
  }();
  return result;
}

int bucket_sum_correct(const std::map<int, LengthBucket>& buckets) {
  int s = 0;
  for (const auto& [len, b] : buckets) s += b.correct;
  return s;
}

int bucket_sum_total(const std::map<int, LengthBucket>& buckets) {
  int s = 0;
  for (const auto& [len, b] : buckets) s += b.total;
  return s;
}

}  // namespace

TEST_CASE("encode_pairs keeps text and produces codec indices") {
  const auto pairs = pairs_by_command({"jump left", "walk twice"});
  const auto encoded = encode_pairs(pairs);
  REQUIRE(encoded.size() == 2);
  CHECK(encoded[0].command == "jump left");
  CHECK(encoded[0].command_idx == TokenCodec::command_indices("jump left"));
  CHECK(encoded[0].action_idx ==
        TokenCodec::action_indices(pairs[0].actions));
  CHECK(encoded[1].actions == pairs[1].actions);
}

TEST_CASE("breakdowns recompose to the overall counts") {
  Seq2SeqModel model(small_config(), 99);
  const auto report = evaluate(model, encode_pairs(dataset_sample(97, 200)));
  CHECK(report.total == 200);
  CHECK(report.correct == bucket_sum_correct(report.by_action_length));
  CHECK(report.total == bucket_sum_total(report.by_action_length));
  CHECK(report.correct == bucket_sum_correct(report.by_command_length));
  CHECK(report.total == bucket_sum_total(report.by_command_length));
  CHECK(report.accuracy ==
        doctest::Approx(double(report.correct) / report.total));
  CHECK(report.oracle_accuracy == -1.0);
  CHECK(report.search_failures == -1);
}

TEST_CASE("buckets are keyed by true lengths") {
  Seq2SeqModel model(small_config(), 99);
  const auto pairs = pairs_by_command({"jump", "jump twice", "jump thrice"});
  const auto report = evaluate(model, encode_pairs(pairs));
  REQUIRE(report.by_action_length.size() == 3);
  CHECK(report.by_action_length.at(1).total == 1);
  CHECK(report.by_action_length.at(2).total == 1);
  CHECK(report.by_action_length.at(3).total == 1);
  CHECK(report.by_command_length.at(1).total == 1);
  CHECK(report.by_command_length.at(2).total == 2);
}

TEST_CASE("length oracle never scores below plain greedy") {
  Seq2SeqModel model(small_config(), 3);
  const auto report =
      evaluate_with_length_oracle(model, encode_pairs(dataset_sample(211, 90)));
  CHECK(report.oracle_accuracy >= report.accuracy);
  CHECK(bucket_sum_total(report.oracle_by_action_length) == report.total);
}

TEST_CASE("constant emitter: all truncated, oracle strictly better") {
  Seq2SeqModel model(small_config(), 1);
  rig_constant_emitter(model, 0);  // action 0 = WALK

  auto pairs = pairs_by_command({"walk", "walk twice", "walk thrice",
                                 "jump", "run left", "walk and walk"});
  const auto report = evaluate_with_length_oracle(model, encode_pairs(pairs));
  CHECK(report.accuracy == 0.0);
  CHECK(report.truncations == report.total);
  // Fixed-length decode emits exactly len WALKs: right for the four
  // all-WALK targets, wrong for the rest.
  CHECK(report.oracle_accuracy == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("constant emitter: no search failures despite all errors") {
  Seq2SeqModel model(small_config(), 1);
  rig_constant_emitter(model, 0);
  const auto pairs = encode_pairs(pairs_by_command({"jump", "run left"}));
  // The greedy output is the modal sequence; truth scores far below it.
  CHECK(search_failure_audit(model, pairs) == 0);
}

TEST_CASE("memorized model: perfect accuracy, near-zero loss, clean audit") {
  const TrainResult& r = memorized();
  REQUIRE(r.model != nullptr);
  const auto pairs = encode_pairs(memorization_split().train);
  const auto report = evaluate_with_length_oracle(*r.model, pairs);
  CHECK(report.accuracy == 1.0);
  CHECK(report.oracle_accuracy == 1.0);
  CHECK(report.truncations == 0);
  CHECK(search_failure_audit(*r.model, pairs) == 0);
  for (const auto& p : pairs) {
    CHECK(r.model->log_likelihood(p.command_idx, p.action_idx) > -0.5);
  }
}

TEST_CASE("memorized model: loss curve fell and is fully sampled") {
  const TrainResult& r = memorized();
  REQUIRE(r.loss_curve.size() == 30);  // every 100 steps, 3000 total
  CHECK(r.loss_curve.front().first == 100);
  CHECK(r.loss_curve.back().first == 3000);
  CHECK(r.loss_curve.back().second < 0.1);
  CHECK(r.loss_curve.front().second > r.loss_curve.back().second);
}

TEST_CASE("nearest neighbors: self similarity, ordering, exclusion") {
  Seq2SeqModel model(small_config(), 21);
  const std::vector<std::string> pool = {"jump left", "walk twice", "run",
                                         "jump left twice"};

  auto with_self = nearest_neighbors(model, "jump left", pool, 4, false);
  REQUIRE(with_self.size() == 4);
  CHECK(with_self[0].command == "jump left");
  CHECK(with_self[0].cosine == doctest::Approx(1.0));
  for (std::size_t i = 1; i < with_self.size(); ++i) {
    CHECK(with_self[i - 1].cosine >= with_self[i].cosine);
    CHECK(with_self[i].cosine <= 1.0 + 1e-12);
    CHECK(with_self[i].cosine >= -1.0 - 1e-12);
  }

  auto without_self = nearest_neighbors(model, "jump left", pool, 4, true);
  REQUIRE(without_self.size() == 3);
  for (const auto& n : without_self) CHECK(n.command != "jump left");
}

TEST_CASE("nearest neighbors: duplicate pool entries tie and sort stably") {
  Seq2SeqModel model(small_config(), 21);
  const std::vector<std::string> pool = {"walk twice", "run", "walk twice"};
  auto out = nearest_neighbors(model, "jump", pool, 3, true);
  REQUIRE(out.size() == 3);
  // The duplicates share a cosine; lexicographic tie-break keeps them
  // adjacent regardless of which beats "run".
  int walk_rank_gap = 0;
  std::vector<std::size_t> walk_at;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].command == "walk twice") walk_at.push_back(i);
  }
  REQUIRE(walk_at.size() == 2);
  walk_rank_gap = int(walk_at[1]) - int(walk_at[0]);
  CHECK(walk_rank_gap == 1);
  CHECK(out[walk_at[0]].cosine == out[walk_at[1]].cosine);
}

TEST_CASE("nearest neighbors: k caps the table") {
  Seq2SeqModel model(small_config(), 21);
  const std::vector<std::string> pool = {"jump", "walk", "run", "look"};
  CHECK(nearest_neighbors(model, "turn left", pool, 2).size() == 2);
  CHECK(nearest_neighbors(model, "turn left", pool, 10).size() == 4);
}

TEST_CASE("nearest neighbors: zero states are rejected") {
  Seq2SeqModel model(small_config(), 21);
  zero_all_params(model);
  const std::vector<std::string> pool = {"walk"};
  CHECK_THROWS_AS(nearest_neighbors(model, "jump", pool, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      nearest_neighbors(model, "jump", std::vector<std::string>{}, 1),
      std::invalid_argument);
}
