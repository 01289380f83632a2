#include "scan/dataset_io.hpp"

#include <fstream>
#include <string>

namespace scan {

std::string format_pair_line(const ScanPair& pair) {
  return "IN: " + pair.command + " OUT: " + pair.actions;
}

ScanPair parse_pair_line(std::string_view line) {
  constexpr std::string_view kIn = "IN: ";
  constexpr std::string_view kOut = " OUT: ";
  if (line.substr(0, kIn.size()) != kIn) {
    throw DatasetFormatError("line does not start with \"IN: \"");
  }
  const std::size_t out_pos = line.find(kOut);
  if (out_pos == std::string_view::npos) {
    throw DatasetFormatError("line has no \" OUT: \" separator");
  }
  ScanPair pair;
  pair.command = std::string(line.substr(kIn.size(), out_pos - kIn.size()));
  pair.actions = std::string(line.substr(out_pos + kOut.size()));
  if (pair.command.empty() || pair.actions.empty()) {
    throw DatasetFormatError("empty command or action field");
  }
  return pair;
}

void write_pairs(const std::filesystem::path& path,
                 std::span<const ScanPair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  for (const ScanPair& p : pairs) {
    out << format_pair_line(p) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ScanPair> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path.string());
  std::vector<ScanPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    pairs.push_back(parse_pair_line(line));
  }
  return pairs;
}

}  // namespace scan
