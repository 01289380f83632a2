#include <algorithm>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "reference_util.hpp"
#include "scan/grammar.hpp"
#include "test_util.hpp"

using namespace scan;
using scan_test::full_dataset;
using scan_test::ref_interpret;

TEST_CASE("dataset has exactly 20910 distinct commands in sorted order") {
  const auto& data = full_dataset();
  CHECK(data.size() == 20910);
  for (std::size_t i = 1; i < data.size(); ++i) {
    CHECK(data[i - 1].command < data[i].command);
  }
}

TEST_CASE("enumeration is deterministic") {
  const auto trees_a = enumerate_commands();
  const auto trees_b = enumerate_commands();
  REQUIRE(trees_a.size() == 20910);
  CHECK(trees_a == trees_b);
}

TEST_CASE("parse inverts the yield of every derivation") {
  for (const ParseTree& tree : enumerate_commands()) {
    CHECK(parse(yield_tokens(tree)) == tree);
  }
}

TEST_CASE("interpreter agrees with the rewrite reference on every command") {
  std::size_t checked = 0;
  for (const ScanPair& p : full_dataset()) {
    const std::string expected = ref_interpret(p.command);
    if (p.actions != expected) {
      // Report the first divergence with context instead of 20k CHECK lines.
      REQUIRE_MESSAGE(p.actions == expected, "command: ", p.command);
    }
    ++checked;
  }
  CHECK(checked == 20910);
}

TEST_CASE("interprets known commands") {
  auto out = [](const std::string& cmd) {
    return action_text(interpret(parse_text(cmd)));
  };
  CHECK(out("jump") == "JUMP");
  CHECK(out("jump left") == "LTURN JUMP");
  CHECK(out("jump around right") == "RTURN JUMP RTURN JUMP RTURN JUMP RTURN JUMP");
  CHECK(out("turn left twice") == "LTURN LTURN");
  CHECK(out("jump thrice") == "JUMP JUMP JUMP");
  CHECK(out("jump opposite left and walk thrice") ==
        "LTURN LTURN JUMP WALK WALK WALK");
  CHECK(out("jump opposite left after walk around left") ==
        "LTURN WALK LTURN WALK LTURN WALK LTURN WALK LTURN LTURN JUMP");
  CHECK(out("turn around right") == "RTURN RTURN RTURN RTURN");
  CHECK(out("turn opposite left") == "LTURN LTURN");
  CHECK(out("walk and run") == "WALK RUN");
  CHECK(out("walk after run") == "RUN WALK");
  CHECK(out("walk around left twice") ==
        "LTURN WALK LTURN WALK LTURN WALK LTURN WALK "
        "LTURN WALK LTURN WALK LTURN WALK LTURN WALK");
}

TEST_CASE("command and action lengths stay within the language bounds") {
  int max_cmd = 0, min_cmd = 99, max_act = 0, min_act = 99;
  std::set<int> action_lengths;
  for (const ScanPair& p : full_dataset()) {
    const int cl = command_length(p);
    const int al = action_length(p);
    max_cmd = std::max(max_cmd, cl);
    min_cmd = std::min(min_cmd, cl);
    max_act = std::max(max_act, al);
    min_act = std::min(min_act, al);
    action_lengths.insert(al);
    CHECK(std::size_t(cl) == split_tokens(p.command).size());
    CHECK(std::size_t(al) == split_tokens(p.actions).size());
  }
  CHECK(min_cmd == 1);
  CHECK(max_cmd == 9);
  CHECK(min_act == 1);
  CHECK(max_act == 48);
  // 23 is unreachable: a single segment emits {1,2,3,4,6,8,12,16,24} actions
  // and no one or two of those values sums to 23.
  CHECK(action_lengths.count(23) == 0);
  CHECK(action_lengths.count(22) == 1);
  CHECK(action_lengths.count(24) == 1);
}

TEST_CASE("action length 22 or less covers 16990 commands") {
  std::size_t at_most_22 = 0, at_least_24 = 0;
  for (const ScanPair& p : full_dataset()) {
    if (action_length(p) <= 22) ++at_most_22;
    if (action_length(p) >= 24) ++at_least_24;
  }
  CHECK(at_most_22 == 16990);
  CHECK(at_least_24 == 3920);
}

TEST_CASE("every yield stays inside the 13-word vocabulary and uses all of it") {
  std::set<std::string> seen;
  for (const ScanPair& p : full_dataset()) {
    for (const std::string& w : split_tokens(p.command)) seen.insert(w);
  }
  REQUIRE(seen.size() == kCommandVocabulary.size());
  for (std::string_view w : kCommandVocabulary) {
    CHECK(seen.count(std::string(w)) == 1);
  }
}

TEST_CASE("swapping one primitive for another swaps the actions") {
  std::unordered_map<std::string, std::string> actions_of;
  for (const ScanPair& p : full_dataset()) actions_of[p.command] = p.actions;

  auto replace_word = [](const std::string& text, const std::string& from,
                         const std::string& to) {
    auto tokens = split_tokens(text);
    for (auto& t : tokens) {
      if (t == from) t = to;
    }
    return join_tokens(tokens);
  };

  std::size_t swapped = 0;
  for (const ScanPair& p : full_dataset()) {
    const auto tokens = split_tokens(p.command);
    const bool has_walk =
        std::find(tokens.begin(), tokens.end(), "walk") != tokens.end();
    const bool has_run =
        std::find(tokens.begin(), tokens.end(), "run") != tokens.end();
    if (!has_walk || has_run) continue;
    const std::string swapped_cmd = replace_word(p.command, "walk", "run");
    auto it = actions_of.find(swapped_cmd);
    REQUIRE(it != actions_of.end());
    CHECK(it->second == replace_word(p.actions, "WALK", "RUN"));
    ++swapped;
  }
  CHECK(swapped > 1000);
}

TEST_CASE("parse rejects words outside the vocabulary") {
  CHECK_THROWS_AS(parse_text("jump backwards"), UnknownWordError);
  CHECK_THROWS_AS(parse_text("Jump"), UnknownWordError);
  CHECK_THROWS_AS(parse_text("walk sprint left"), UnknownWordError);
}

TEST_CASE("parse rejects in-vocabulary sequences outside the grammar") {
  CHECK_THROWS_AS(parse_text(""), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("turn"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("jump jump"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("jump twice thrice"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("and jump"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("jump and"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("walk and jump after run"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("opposite left"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("left jump"), NotInGrammarError);
  CHECK_THROWS_AS(parse_text("jump around around left"), NotInGrammarError);
}

TEST_CASE("interpretation output uses only the six action symbols") {
  const std::set<std::string> names(kActionNames.begin(), kActionNames.end());
  for (const ScanPair& p : full_dataset()) {
    for (const std::string& a : split_tokens(p.actions)) {
      CHECK(names.count(a) == 1);
    }
  }
}
