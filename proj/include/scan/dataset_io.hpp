#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "scan/grammar.hpp"

namespace scan {

struct DatasetFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One pair per line, `IN: <command> OUT: <actions>`, LF line endings, ASCII.
void write_pairs(const std::filesystem::path& path,
                 std::span<const ScanPair> pairs);

std::vector<ScanPair> read_pairs(const std::filesystem::path& path);

std::string format_pair_line(const ScanPair& pair);
ScanPair parse_pair_line(std::string_view line);

}  // namespace scan
