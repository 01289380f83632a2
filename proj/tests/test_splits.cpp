#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "scan/splits.hpp"
#include "test_util.hpp"

using namespace scan;
using scan_test::full_dataset;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void check_partition(const Split& split, std::size_t expected_total) {
  std::set<std::string> train_cmds, test_cmds;
  for (const auto& p : split.train) train_cmds.insert(p.command);
  for (const auto& p : split.test) test_cmds.insert(p.command);
  CHECK(train_cmds.size() == split.train.size());
  CHECK(test_cmds.size() == split.test.size());
  std::vector<std::string> overlap;
  std::set_intersection(train_cmds.begin(), train_cmds.end(),
                        test_cmds.begin(), test_cmds.end(),
                        std::back_inserter(overlap));
  CHECK(overlap.empty());
  CHECK(split.train.size() + split.test.size() == expected_total);
}

void check_weights_sum_to_one(const Split& split) {
  double sum = 0.0;
  for (double w : split.presentation_weights) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(split.presentation_weights.size() == split.train.size());
}

}  // namespace

TEST_CASE("random 80/20 split has the exact documented sizes") {
  const Split s = random_split(full_dataset(), 0.8, 7);
  CHECK(s.train.size() == 16728);
  CHECK(s.test.size() == 4182);
  check_partition(s, 20910);
  check_weights_sum_to_one(s);
}

TEST_CASE("random half split takes the floor") {
  const Split s = random_split(full_dataset(), 0.5, 7);
  CHECK(s.train.size() == 10455);
}

TEST_CASE("random split is seed-deterministic and seed-sensitive") {
  const Split a = random_split(full_dataset(), 0.8, 11);
  const Split b = random_split(full_dataset(), 0.8, 11);
  const Split c = random_split(full_dataset(), 0.8, 12);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train != c.train);
}

TEST_CASE("random split keeps canonical dataset order") {
  const Split s = random_split(full_dataset(), 0.8, 3);
  CHECK(std::is_sorted(s.train.begin(), s.train.end(),
                       [](const ScanPair& a, const ScanPair& b) {
                         return a.command < b.command;
                       }));
  CHECK(std::is_sorted(s.test.begin(), s.test.end(),
                       [](const ScanPair& a, const ScanPair& b) {
                         return a.command < b.command;
                       }));
}

TEST_CASE("coverage split sizes match the floor of each percentage") {
  CHECK(coverage_split(full_dataset(), 1, 5).train.size() == 209);
  CHECK(coverage_split(full_dataset(), 2, 5).train.size() == 418);
  CHECK(coverage_split(full_dataset(), 4, 5).train.size() == 836);
  CHECK(coverage_split(full_dataset(), 64, 5).train.size() == 13382);
  const Split s = coverage_split(full_dataset(), 8, 5);
  check_partition(s, 20910);
  check_weights_sum_to_one(s);
}

TEST_CASE("length split at 22 actions reproduces the canonical partition") {
  const Split s = length_split(full_dataset(), 22);
  CHECK(s.train.size() == 16990);
  CHECK(s.test.size() == 3920);
  check_partition(s, 20910);
  int min_test = 99, max_test = 0;
  for (const auto& p : s.train) CHECK(action_length(p) <= 22);
  for (const auto& p : s.test) {
    min_test = std::min(min_test, action_length(p));
    max_test = std::max(max_test, action_length(p));
  }
  CHECK(min_test == 24);
  CHECK(max_test == 48);
}

TEST_CASE("length split at the maximum leaves the test side empty") {
  const Split s = length_split(full_dataset(), 48);
  CHECK(s.test.empty());
  CHECK(s.train.size() == 20910);
}

TEST_CASE("jump split isolates every composed jump command") {
  const Split s = primitive_split(full_dataset(), PrimitiveTarget::kJump);
  check_partition(s, 20910);
  check_weights_sum_to_one(s);

  // Of the 34 verb phrases, 27 avoid "jump", giving 81 sentence forms and
  // 81 + 2*81^2 = 13203 jump-free commands; adding bare "jump" gives 13204.
  CHECK(s.train.size() == 13204);
  CHECK(s.test.size() == 7706);

  bool saw_bare = false;
  for (const auto& p : s.train) {
    if (p.command == "jump") {
      saw_bare = true;
      CHECK(p.actions == "JUMP");
    } else {
      CHECK(!contains_target_phrase(p, PrimitiveTarget::kJump));
    }
  }
  CHECK(saw_bare);
  for (const auto& p : s.test) {
    CHECK(contains_target_phrase(p, PrimitiveTarget::kJump));
    CHECK(p.command != "jump");
  }
}

TEST_CASE("jump split presentation weights put ten percent on the bare command") {
  const Split s = primitive_split(full_dataset(), PrimitiveTarget::kJump);
  double bare_mass = 0.0, rest_mass = 0.0;
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    (s.train[i].command == "jump" ? bare_mass : rest_mass) +=
        s.presentation_weights[i];
  }
  CHECK(bare_mass == doctest::Approx(0.10));
  CHECK(rest_mass == doctest::Approx(0.90));
}

TEST_CASE("turn left split treats only the contiguous phrase as the target") {
  const Split s = primitive_split(full_dataset(), PrimitiveTarget::kTurnLeft);
  check_partition(s, 20910);

  // "turn left" appears contiguously in 3 of the 102 sentence forms, so
  // 99 + 2*99^2 = 19701 commands avoid it; with the bare pair that is 19702.
  CHECK(s.train.size() == 19702);
  CHECK(s.test.size() == 1208);

  const auto in_train = [&](const std::string& cmd) {
    return std::any_of(s.train.begin(), s.train.end(),
                       [&](const ScanPair& p) { return p.command == cmd; });
  };
  CHECK(in_train("turn left"));
  CHECK(in_train("walk left and jump left"));
  CHECK(in_train("turn opposite left"));
  CHECK(in_train("turn around left"));
  CHECK(!in_train("turn left twice"));
  CHECK(!in_train("jump and turn left"));
}

TEST_CASE("composed jump split injects the requested commands into train") {
  const Split base = primitive_split(full_dataset(), PrimitiveTarget::kJump);
  for (int n : {1, 8, 32}) {
    const Split s = primitive_plus_composed_split(full_dataset(), n, 21);
    check_partition(s, 20910);
    check_weights_sum_to_one(s);
    CHECK(s.train.size() == base.train.size() + std::size_t(n));
    CHECK(s.test.size() == base.test.size() - std::size_t(n));

    std::size_t jump_related = 0;
    double jump_mass = 0.0;
    for (std::size_t i = 0; i < s.train.size(); ++i) {
      if (contains_target_phrase(s.train[i], PrimitiveTarget::kJump)) {
        ++jump_related;
        jump_mass += s.presentation_weights[i];
      }
    }
    CHECK(jump_related == std::size_t(n) + 1);
    CHECK(jump_mass == doctest::Approx(0.10));
  }
}

TEST_CASE("composed jump split choice depends on the seed") {
  const Split a = primitive_plus_composed_split(full_dataset(), 4, 1);
  const Split b = primitive_plus_composed_split(full_dataset(), 4, 2);
  const Split c = primitive_plus_composed_split(full_dataset(), 4, 1);
  CHECK(a.train != b.train);
  CHECK(a.train == c.train);
}

TEST_CASE("composed jump split rejects requests beyond the available pool") {
  // A dataset holding a single composed jump command cannot supply 32.
  std::vector<ScanPair> tiny;
  for (const auto& p : full_dataset()) {
    if (p.command == "jump" || p.command == "jump twice" ||
        p.command == "walk" || p.command == "run twice") {
      tiny.push_back(p);
    }
  }
  REQUIRE(tiny.size() == 4);
  CHECK_THROWS_AS(primitive_plus_composed_split(tiny, 32, 0),
                  InvalidCountError);
}

TEST_CASE("spec validation rejects out-of-range parameters") {
  SplitSpec spec;
  spec.kind = SplitKind::kRandom;
  spec.fraction = 0.0;
  CHECK_THROWS_AS(spec.validate(), InvalidSpecError);
  spec.fraction = 1.0;
  CHECK_THROWS_AS(spec.validate(), InvalidSpecError);

  spec = SplitSpec{};
  spec.kind = SplitKind::kCoverage;
  spec.coverage_percent = 3;
  CHECK_THROWS_AS(spec.validate(), InvalidSpecError);

  spec = SplitSpec{};
  spec.kind = SplitKind::kLength;
  spec.length_cutoff = 0;
  CHECK_THROWS_AS(spec.validate(), InvalidSpecError);

  spec = SplitSpec{};
  spec.kind = SplitKind::kPrimitivePlusComposed;
  spec.num_composed = 5;
  CHECK_THROWS_AS(spec.validate(), InvalidSpecError);
}

TEST_CASE("split kind and target names round-trip") {
  for (auto kind : {SplitKind::kRandom, SplitKind::kCoverage, SplitKind::kLength,
                    SplitKind::kPrimitive, SplitKind::kPrimitivePlusComposed}) {
    CHECK(split_kind_from_string(to_string(kind)) == kind);
  }
  for (auto target : {PrimitiveTarget::kJump, PrimitiveTarget::kTurnLeft}) {
    CHECK(primitive_target_from_string(to_string(target)) == target);
  }
  CHECK_THROWS_AS(split_kind_from_string("bogus"), InvalidSpecError);
}

TEST_CASE("presentation sampling matches uniform weights in the long run") {
  const Split s = coverage_split(full_dataset(), 1, 9);
  REQUIRE(s.train.size() == 209);
  const std::size_t draws = 1000000;
  std::vector<std::size_t> counts(s.train.size(), 0);
  Rng rng(123);
  for (std::size_t i = 0; i < draws; ++i) {
    ++counts[sample_presentation_index(s, rng)];
  }
  const double p = 1.0 / double(s.train.size());
  const double mean = double(draws) * p;
  const double sigma = std::sqrt(double(draws) * p * (1.0 - p));
  std::size_t outside_3s = 0;
  for (std::size_t c : counts) {
    CHECK(std::abs(double(c) - mean) <= 4.0 * sigma);
    if (std::abs(double(c) - mean) > 3.0 * sigma) ++outside_3s;
  }
  // A few 3-sigma excursions among 209 bins are expected noise.
  CHECK(outside_3s <= 4);
}

TEST_CASE("presentation sampling oversamples the bare jump command") {
  const Split s = primitive_split(full_dataset(), PrimitiveTarget::kJump);
  const std::size_t draws = 100000;
  std::size_t bare = 0;
  Rng rng(321);
  for (std::size_t i = 0; i < draws; ++i) {
    if (sample_presentation(s, rng).command == "jump") ++bare;
  }
  const double freq = double(bare) / double(draws);
  // 3 sigma around 0.10 at this sample size is roughly +/- 0.003.
  CHECK(freq == doctest::Approx(0.10).epsilon(0.03));
}

TEST_CASE("sampling a single-pair split always returns that pair") {
  Split s;
  s.train = {{"jump", "JUMP"}};
  s.presentation_weights = {1.0};
  s.rebuild_cumulative();
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_presentation(s, rng).command == "jump");
  }
}

TEST_CASE("identical spec and seed produce byte-identical split files") {
  const Split s = random_split(full_dataset(), 0.8, 17);
  const auto dir_a = scan_test::scratch_dir("split_a");
  const auto dir_b = scan_test::scratch_dir("split_b");
  save_split(s, dir_a);
  save_split(random_split(full_dataset(), 0.8, 17), dir_b);
  CHECK(slurp(dir_a / "train.txt") == slurp(dir_b / "train.txt"));
  CHECK(slurp(dir_a / "test.txt") == slurp(dir_b / "test.txt"));
  CHECK(slurp(dir_a / "meta.json") == slurp(dir_b / "meta.json"));
  CHECK(!slurp(dir_a / "train.txt").empty());
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("save then load restores pairs, spec, and weights") {
  for (const Split& s :
       {random_split(full_dataset(), 0.8, 2),
        primitive_split(full_dataset(), PrimitiveTarget::kJump),
        primitive_plus_composed_split(full_dataset(), 8, 4),
        length_split(full_dataset(), 48)}) {
    const auto dir = scan_test::scratch_dir("split_rt");
    save_split(s, dir);
    const Split r = load_split(dir);
    CHECK(r.train == s.train);
    CHECK(r.test == s.test);
    CHECK(r.spec.kind == s.spec.kind);
    CHECK(r.spec.seed == s.spec.seed);
    REQUIRE(r.presentation_weights.size() == s.presentation_weights.size());
    for (std::size_t i = 0; i < r.presentation_weights.size(); ++i) {
      CHECK(r.presentation_weights[i] ==
            doctest::Approx(s.presentation_weights[i]).epsilon(1e-12));
    }
    std::filesystem::remove_all(dir);
  }
}
