#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scan/grammar.hpp"
#include "scan/rng.hpp"

namespace scan {

struct InvalidSpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidCountError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SplitKind : std::uint8_t {
  kRandom = 0,
  kCoverage,
  kLength,
  kPrimitive,
  kPrimitivePlusComposed,
};

enum class PrimitiveTarget : std::uint8_t { kJump = 0, kTurnLeft };

std::string to_string(SplitKind kind);
std::string to_string(PrimitiveTarget target);
SplitKind split_kind_from_string(const std::string& s);
PrimitiveTarget primitive_target_from_string(const std::string& s);

// A named experimental regime. Only the parameters matching `kind` are
// meaningful; validate() rejects out-of-range values.
struct SplitSpec {
  SplitKind kind = SplitKind::kRandom;
  double fraction = 0.8;        // kRandom
  int coverage_percent = 1;     // kCoverage: one of {1,2,4,8,16,32,64}
  int length_cutoff = 22;       // kLength
  PrimitiveTarget target = PrimitiveTarget::kJump;  // kPrimitive*
  int num_composed = 1;         // kPrimitivePlusComposed: {1,2,4,8,16,32}
  bool oversample = true;       // kPrimitive*: 10% presentation mass on target
  std::uint64_t seed = 0;

  void validate() const;
  std::string name() const;
};

// Disjoint train/test pair sets plus per-train-pair presentation sampling
// probabilities (sum to 1). Train and test are kept in canonical dataset
// order so split files are byte-identical for identical (spec, seed).
struct Split {
  SplitSpec spec;
  std::vector<ScanPair> train;
  std::vector<ScanPair> test;
  std::vector<double> presentation_weights;

  // Prefix sums of presentation_weights, built once for O(log n) sampling.
  std::vector<double> cumulative_weights;
  void rebuild_cumulative();
};

bool contains_target_phrase(const ScanPair& pair, PrimitiveTarget target);
std::string bare_command(PrimitiveTarget target);

Split random_split(const std::vector<ScanPair>& dataset, double fraction,
                   std::uint64_t seed);
Split coverage_split(const std::vector<ScanPair>& dataset, int percent,
                     std::uint64_t seed);
Split length_split(const std::vector<ScanPair>& dataset, int cutoff = 22);
Split primitive_split(const std::vector<ScanPair>& dataset,
                      PrimitiveTarget target, bool oversample = true);
Split primitive_plus_composed_split(const std::vector<ScanPair>& dataset,
                                    int num_composed, std::uint64_t seed,
                                    bool oversample = true);

Split build_split(const std::vector<ScanPair>& dataset, const SplitSpec& spec);

// Draws one train pair index according to presentation_weights, advancing
// `rng` deterministically.
std::size_t sample_presentation_index(const Split& split, Rng& rng);
const ScanPair& sample_presentation(const Split& split, Rng& rng);

// Writes train.txt, test.txt (dataset format) and meta.json (spec, seed,
// sizes, presentation weights). load_split reads them back.
void save_split(const Split& split, const std::filesystem::path& dir);
Split load_split(const std::filesystem::path& dir);

}  // namespace scan
