#pragma once

// nlohmann-json ADL conversions for the config types, shared by
// checkpoints, run records, split metadata, and manifests.

#include <string>

#include "json.hpp"
#include "scan/model.hpp"
#include "scan/splits.hpp"
#include "scan/train.hpp"

namespace scan {

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"cell", to_string(c.cell)},
                     {"layers", c.layers},
                     {"hidden", c.hidden},
                     {"dropout", c.dropout},
                     {"attention", c.attention},
                     {"input_vocab", c.input_vocab},
                     {"output_vocab", c.output_vocab}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.cell = cell_type_from_string(j.at("cell").get<std::string>());
  c.layers = j.at("layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.attention = j.at("attention").get<bool>();
  c.input_vocab = j.value("input_vocab", TokenCodec::kInputVocab);
  c.output_vocab = j.value("output_vocab", TokenCodec::kOutputVocab);
}

inline void to_json(nlohmann::json& j, const TrainConfig& t) {
  j = nlohmann::json{{"steps", t.steps},
                     {"learning_rate", t.learning_rate},
                     {"clip_norm", t.clip_norm},
                     {"teacher_forcing_prob", t.teacher_forcing_prob},
                     {"seed", t.seed},
                     {"replication_count", t.replication_count}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& t) {
  t.steps = j.at("steps").get<std::uint64_t>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.clip_norm = j.at("clip_norm").get<double>();
  t.teacher_forcing_prob = j.at("teacher_forcing_prob").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.replication_count = j.value("replication_count", 5);
}

inline void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = nlohmann::json{{"name", s.name()}, {"seed", s.seed}};
  switch (s.kind) {
    case SplitKind::kRandom:
      j["kind"] = "random";
      j["fraction"] = s.fraction;
      break;
    case SplitKind::kCoverage:
      j["kind"] = "coverage";
      j["percent"] = s.coverage_percent;
      break;
    case SplitKind::kLength:
      j["kind"] = "length";
      j["cutoff"] = s.length_cutoff;
      break;
    case SplitKind::kPrimitive:
      j["kind"] = "primitive";
      j["target"] =
          s.target == PrimitiveTarget::kJump ? "jump" : "turn_left";
      j["oversample"] = s.oversample;
      break;
    case SplitKind::kPrimitivePlusComposed:
      j["kind"] = "primitive_plus_composed";
      j["target"] =
          s.target == PrimitiveTarget::kJump ? "jump" : "turn_left";
      j["num_composed"] = s.num_composed;
      j["oversample"] = s.oversample;
      break;
  }
}

inline void from_json(const nlohmann::json& j, SplitSpec& s) {
  const std::string kind = j.at("kind").get<std::string>();
  s = SplitSpec{};
  s.seed = j.at("seed").get<std::uint64_t>();
  if (kind == "random") {
    s.kind = SplitKind::kRandom;
    s.fraction = j.value("fraction", 0.8);
  } else if (kind == "coverage") {
    s.kind = SplitKind::kCoverage;
    s.coverage_percent = j.at("percent").get<int>();
  } else if (kind == "length") {
    s.kind = SplitKind::kLength;
    s.length_cutoff = j.value("cutoff", 22);
  } else if (kind == "primitive" || kind == "primitive_plus_composed") {
    s.kind = kind == "primitive" ? SplitKind::kPrimitive
                                 : SplitKind::kPrimitivePlusComposed;
    const std::string target = j.at("target").get<std::string>();
    if (target == "jump") {
      s.target = PrimitiveTarget::kJump;
    } else if (target == "turn_left") {
      s.target = PrimitiveTarget::kTurnLeft;
    } else {
      throw InvalidSpecError("unknown primitive target: " + target);
    }
    s.oversample = j.value("oversample", true);
    if (s.kind == SplitKind::kPrimitivePlusComposed) {
      s.num_composed = j.at("num_composed").get<int>();
    }
  } else {
    throw InvalidSpecError("unknown split kind: " + kind);
  }
}

}  // namespace scan
