#include "scan/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "scan/dataset_io.hpp"

namespace scan {

namespace {

constexpr double kOversampleMass = 0.10;

const std::vector<int> kCoveragePercents = {1, 2, 4, 8, 16, 32, 64};
const std::vector<int> kComposedCounts = {1, 2, 4, 8, 16, 32};

std::vector<ScanPair> gather(const std::vector<ScanPair>& dataset,
                             const std::vector<std::size_t>& indices) {
  std::vector<ScanPair> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(dataset[i]);
  return out;
}

void set_uniform_weights(Split& split) {
  const std::size_t n = split.train.size();
  split.presentation_weights.assign(n, n ? 1.0 / double(n) : 0.0);
  split.rebuild_cumulative();
}

// Assigns `mass` split evenly over the train pairs whose commands are listed
// in `special`, and 1 - mass evenly over the rest.
void set_oversampled_weights(Split& split,
                             const std::vector<std::string>& special,
                             double mass) {
  const std::size_t n = split.train.size();
  std::vector<bool> is_special(n, false);
  std::size_t n_special = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(special.begin(), special.end(), split.train[i].command) !=
        special.end()) {
      is_special[i] = true;
      ++n_special;
    }
  }
  if (n_special != special.size()) {
    throw InvalidSpecError("oversampled command missing from train set");
  }
  const std::size_t n_rest = n - n_special;
  split.presentation_weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    split.presentation_weights[i] = is_special[i]
                                        ? mass / double(n_special)
                                        : (1.0 - mass) / double(n_rest);
  }
  split.rebuild_cumulative();
}

// Random subset of `count` dataset indices; remainder is the complement.
// Both sides come back sorted so train/test keep canonical dataset order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> random_subset(
    std::size_t total, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> indices(total);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(indices, rng);
  std::vector<std::size_t> picked(indices.begin(), indices.begin() + count);
  std::vector<std::size_t> rest(indices.begin() + count, indices.end());
  std::sort(picked.begin(), picked.end());
  std::sort(rest.begin(), rest.end());
  return {std::move(picked), std::move(rest)};
}

}  // namespace

std::string to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::kRandom: return "random";
    case SplitKind::kCoverage: return "coverage";
    case SplitKind::kLength: return "length";
    case SplitKind::kPrimitive: return "primitive";
    case SplitKind::kPrimitivePlusComposed: return "primitive_plus_composed";
  }
  throw std::logic_error("bad split kind");
}

std::string to_string(PrimitiveTarget target) {
  return target == PrimitiveTarget::kJump ? "jump" : "turn_left";
}

SplitKind split_kind_from_string(const std::string& s) {
  for (int k = 0; k <= int(SplitKind::kPrimitivePlusComposed); ++k) {
    if (to_string(SplitKind(k)) == s) return SplitKind(k);
  }
  throw InvalidSpecError("unknown split kind: " + s);
}

PrimitiveTarget primitive_target_from_string(const std::string& s) {
  if (s == "jump") return PrimitiveTarget::kJump;
  if (s == "turn_left") return PrimitiveTarget::kTurnLeft;
  throw InvalidSpecError("unknown primitive target: " + s);
}

void SplitSpec::validate() const {
  switch (kind) {
    case SplitKind::kRandom:
      if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InvalidSpecError("fraction must be in (0,1)");
      }
      break;
    case SplitKind::kCoverage:
      if (std::find(kCoveragePercents.begin(), kCoveragePercents.end(),
                    coverage_percent) == kCoveragePercents.end()) {
        throw InvalidSpecError("coverage percent must be in {1,2,4,8,16,32,64}");
      }
      break;
    case SplitKind::kLength:
      if (length_cutoff < 1) throw InvalidSpecError("cutoff must be >= 1");
      break;
    case SplitKind::kPrimitive:
      break;
    case SplitKind::kPrimitivePlusComposed:
      if (std::find(kComposedCounts.begin(), kComposedCounts.end(),
                    num_composed) == kComposedCounts.end()) {
        throw InvalidSpecError("num_composed must be in {1,2,4,8,16,32}");
      }
      break;
  }
}

std::string SplitSpec::name() const {
  switch (kind) {
    case SplitKind::kRandom:
      return "random" + std::to_string(int(std::lround(fraction * 100)));
    case SplitKind::kCoverage:
      return "coverage" + std::to_string(coverage_percent);
    case SplitKind::kLength:
      return "length" + std::to_string(length_cutoff);
    case SplitKind::kPrimitive:
      return "primitive_" + to_string(target);
    case SplitKind::kPrimitivePlusComposed:
      return "jump_composed" + std::to_string(num_composed);
  }
  throw std::logic_error("bad split kind");
}

void Split::rebuild_cumulative() {
  cumulative_weights.resize(presentation_weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < presentation_weights.size(); ++i) {
    acc += presentation_weights[i];
    cumulative_weights[i] = acc;
  }
}

bool contains_target_phrase(const ScanPair& pair, PrimitiveTarget target) {
  const std::vector<std::string> tokens = split_tokens(pair.command);
  if (target == PrimitiveTarget::kJump) {
    return std::find(tokens.begin(), tokens.end(), "jump") != tokens.end();
  }
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i] == "turn" && tokens[i + 1] == "left") return true;
  }
  return false;
}

std::string bare_command(PrimitiveTarget target) {
  return target == PrimitiveTarget::kJump ? "jump" : "turn left";
}

Split random_split(const std::vector<ScanPair>& dataset, double fraction,
                   std::uint64_t seed) {
  SplitSpec spec;
  spec.kind = SplitKind::kRandom;
  spec.fraction = fraction;
  spec.seed = seed;
  spec.validate();

  const auto count =
      std::size_t(std::floor(fraction * double(dataset.size())));
  auto [train_idx, test_idx] = random_subset(dataset.size(), count, seed);

  Split split;
  split.spec = spec;
  split.train = gather(dataset, train_idx);
  split.test = gather(dataset, test_idx);
  set_uniform_weights(split);
  return split;
}

Split coverage_split(const std::vector<ScanPair>& dataset, int percent,
                     std::uint64_t seed) {
  SplitSpec spec;
  spec.kind = SplitKind::kCoverage;
  spec.coverage_percent = percent;
  spec.seed = seed;
  spec.validate();

  const auto count =
      std::size_t(std::floor(double(percent) / 100.0 * double(dataset.size())));
  auto [train_idx, test_idx] = random_subset(dataset.size(), count, seed);

  Split split;
  split.spec = spec;
  split.train = gather(dataset, train_idx);
  split.test = gather(dataset, test_idx);
  set_uniform_weights(split);
  return split;
}

Split length_split(const std::vector<ScanPair>& dataset, int cutoff) {
  SplitSpec spec;
  spec.kind = SplitKind::kLength;
  spec.length_cutoff = cutoff;
  spec.validate();

  Split split;
  split.spec = spec;
  for (const ScanPair& p : dataset) {
    (action_length(p) <= cutoff ? split.train : split.test).push_back(p);
  }
  set_uniform_weights(split);
  return split;
}

Split primitive_split(const std::vector<ScanPair>& dataset,
                      PrimitiveTarget target, bool oversample) {
  SplitSpec spec;
  spec.kind = SplitKind::kPrimitive;
  spec.target = target;
  spec.oversample = oversample;

  const std::string bare = bare_command(target);
  Split split;
  split.spec = spec;
  for (const ScanPair& p : dataset) {
    if (p.command == bare || !contains_target_phrase(p, target)) {
      split.train.push_back(p);
    } else {
      split.test.push_back(p);
    }
  }
  if (oversample) {
    set_oversampled_weights(split, {bare}, kOversampleMass);
  } else {
    set_uniform_weights(split);
  }
  return split;
}

Split primitive_plus_composed_split(const std::vector<ScanPair>& dataset,
                                    int num_composed, std::uint64_t seed,
                                    bool oversample) {
  SplitSpec spec;
  spec.kind = SplitKind::kPrimitivePlusComposed;
  spec.target = PrimitiveTarget::kJump;
  spec.num_composed = num_composed;
  spec.seed = seed;
  spec.oversample = oversample;
  spec.validate();

  const std::string bare = bare_command(PrimitiveTarget::kJump);
  std::vector<std::size_t> composed_idx;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].command != bare &&
        contains_target_phrase(dataset[i], PrimitiveTarget::kJump)) {
      composed_idx.push_back(i);
    }
  }
  if (std::size_t(num_composed) > composed_idx.size()) {
    throw InvalidCountError("num_composed exceeds available composed commands");
  }

  Rng rng(seed);
  shuffle(composed_idx, rng);
  std::vector<std::size_t> injected(composed_idx.begin(),
                                    composed_idx.begin() + num_composed);
  std::sort(injected.begin(), injected.end());

  std::vector<std::string> special = {bare};
  Split split;
  split.spec = spec;
  std::size_t next_injected = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const bool is_injected =
        next_injected < injected.size() && injected[next_injected] == i;
    if (is_injected) {
      ++next_injected;
      special.push_back(dataset[i].command);
      split.train.push_back(dataset[i]);
    } else if (dataset[i].command == bare ||
               !contains_target_phrase(dataset[i], PrimitiveTarget::kJump)) {
      split.train.push_back(dataset[i]);
    } else {
      split.test.push_back(dataset[i]);
    }
  }
  if (oversample) {
    set_oversampled_weights(split, special, kOversampleMass);
  } else {
    set_uniform_weights(split);
  }
  return split;
}

Split build_split(const std::vector<ScanPair>& dataset, const SplitSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case SplitKind::kRandom:
      return random_split(dataset, spec.fraction, spec.seed);
    case SplitKind::kCoverage:
      return coverage_split(dataset, spec.coverage_percent, spec.seed);
    case SplitKind::kLength:
      return length_split(dataset, spec.length_cutoff);
    case SplitKind::kPrimitive:
      return primitive_split(dataset, spec.target, spec.oversample);
    case SplitKind::kPrimitivePlusComposed:
      return primitive_plus_composed_split(dataset, spec.num_composed,
                                           spec.seed, spec.oversample);
  }
  throw std::logic_error("bad split kind");
}

std::size_t sample_presentation_index(const Split& split, Rng& rng) {
  if (split.train.empty()) throw InvalidSpecError("empty train set");
  const double u = rng.next_double() * split.cumulative_weights.back();
  const auto it = std::upper_bound(split.cumulative_weights.begin(),
                                   split.cumulative_weights.end(), u);
  const std::size_t idx = std::size_t(it - split.cumulative_weights.begin());
  return std::min(idx, split.train.size() - 1);
}

const ScanPair& sample_presentation(const Split& split, Rng& rng) {
  return split.train[sample_presentation_index(split, rng)];
}

void save_split(const Split& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_pairs(dir / "train.txt", split.train);
  write_pairs(dir / "test.txt", split.test);

  nlohmann::json meta;
  meta["kind"] = to_string(split.spec.kind);
  meta["seed"] = split.spec.seed;
  meta["train_size"] = split.train.size();
  meta["test_size"] = split.test.size();
  switch (split.spec.kind) {
    case SplitKind::kRandom:
      meta["fraction"] = split.spec.fraction;
      break;
    case SplitKind::kCoverage:
      meta["coverage_percent"] = split.spec.coverage_percent;
      break;
    case SplitKind::kLength:
      meta["length_cutoff"] = split.spec.length_cutoff;
      break;
    case SplitKind::kPrimitive:
      meta["target"] = to_string(split.spec.target);
      meta["oversample"] = split.spec.oversample;
      break;
    case SplitKind::kPrimitivePlusComposed:
      meta["target"] = to_string(split.spec.target);
      meta["num_composed"] = split.spec.num_composed;
      meta["oversample"] = split.spec.oversample;
      break;
  }

  // Presentation weights, recorded as their generating scheme: either
  // uniform over train, or `mass` spread over the listed train line indices
  // (0-based) with the remainder uniform over the rest.
  nlohmann::json weights;
  bool uniform = true;
  for (double w : split.presentation_weights) {
    if (w != split.presentation_weights.front()) uniform = false;
  }
  if (uniform) {
    weights["scheme"] = "uniform";
  } else {
    weights["scheme"] = "oversample";
    weights["mass"] = kOversampleMass;
    std::vector<std::size_t> members;
    const double uniform_w = (1.0 - kOversampleMass) /
                             double(split.train.size());
    for (std::size_t i = 0; i < split.presentation_weights.size(); ++i) {
      if (split.presentation_weights[i] > uniform_w * 1.5) members.push_back(i);
    }
    weights["members"] = members;
  }
  meta["presentation_weights"] = weights;

  std::ofstream out(dir / "meta.json", std::ios::binary);
  out << meta.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write meta.json");
}

Split load_split(const std::filesystem::path& dir) {
  Split split;
  split.train = read_pairs(dir / "train.txt");
  split.test = read_pairs(dir / "test.txt");

  std::ifstream in(dir / "meta.json");
  if (!in) throw std::runtime_error("cannot read meta.json");
  nlohmann::json meta = nlohmann::json::parse(in);

  split.spec.kind = split_kind_from_string(meta.at("kind"));
  split.spec.seed = meta.value("seed", std::uint64_t{0});
  if (meta.contains("fraction")) split.spec.fraction = meta["fraction"];
  if (meta.contains("coverage_percent")) {
    split.spec.coverage_percent = meta["coverage_percent"];
  }
  if (meta.contains("length_cutoff")) {
    split.spec.length_cutoff = meta["length_cutoff"];
  }
  if (meta.contains("target")) {
    split.spec.target = primitive_target_from_string(meta["target"]);
  }
  if (meta.contains("num_composed")) {
    split.spec.num_composed = meta["num_composed"];
  }
  if (meta.contains("oversample")) split.spec.oversample = meta["oversample"];

  const nlohmann::json& weights = meta.at("presentation_weights");
  if (weights.at("scheme") == "uniform") {
    set_uniform_weights(split);
  } else {
    const double mass = weights.at("mass");
    std::vector<std::size_t> members =
        weights.at("members").get<std::vector<std::size_t>>();
    const std::size_t n = split.train.size();
    const std::size_t n_special = members.size();
    split.presentation_weights.assign(
        n, (1.0 - mass) / double(n - n_special));
    for (std::size_t i : members) {
      split.presentation_weights.at(i) = mass / double(n_special);
    }
    split.rebuild_cumulative();
  }
  return split;
}

}  // namespace scan
