#include "scan/manifest.hpp"

#include <stdexcept>

#include "scan/fs_util.hpp"

namespace scan {

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = {{"tool", m.tool},
       {"version", m.version},
       {"subcommand", m.subcommand},
       {"config", m.config},
       {"seeds", m.seeds},
       {"inputs", m.inputs},
       {"outputs", m.outputs},
       {"wall_seconds", m.wall_seconds}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("tool").get_to(m.tool);
  j.at("version").get_to(m.version);
  j.at("subcommand").get_to(m.subcommand);
  m.config = j.at("config");
  j.at("seeds").get_to(m.seeds);
  j.at("inputs").get_to(m.inputs);
  j.at("outputs").get_to(m.outputs);
  j.at("wall_seconds").get_to(m.wall_seconds);
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::filesystem::create_directories(dir);
  const nlohmann::json j = m;
  atomic_write_file((dir / "manifest.json").string(), j.dump(2) + "\n");
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(file)) file /= "manifest.json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(file.string()));
    return j.get<RunManifest>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest at " + file.string() + ": " +
                             e.what());
  }
}

std::map<std::string, std::string> digest_inputs(
    const std::vector<std::string>& paths) {
  std::map<std::string, std::string> out;
  for (const std::string& p : paths) out[p] = sha256_file(p);
  return out;
}

}  // namespace scan
