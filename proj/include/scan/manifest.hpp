#pragma once

// Run manifests: every CLI output directory carries exactly one
// manifest.json recording the tool version, the subcommand, the fully
// resolved configuration, the seeds, digests of every input file, and the
// paths written. Re-running the subcommand with the recorded config
// reproduces the outputs byte-exactly; only the wall-clock field varies.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace scan {

inline constexpr const char* kToolName = "scan";
inline constexpr const char* kToolVersion = "1.0.0";

struct RunManifest {
  std::string tool = kToolName;
  std::string version = kToolVersion;
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();  // resolved, post-merge
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> inputs;  // input path -> sha256 hex
  std::vector<std::string> outputs;           // files written by the run
  double wall_seconds = 0.0;
};

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

// Writes dir/manifest.json atomically, creating the directory if needed.
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

// Reads a manifest from a directory (dir/manifest.json) or a direct file
// path. Throws std::runtime_error on missing or malformed manifests.
RunManifest load_manifest(const std::filesystem::path& path);

// sha256 digest per input path, keyed by the path as given.
std::map<std::string, std::string> digest_inputs(
    const std::vector<std::string>& paths);

}  // namespace scan
