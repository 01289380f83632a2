#pragma once

// Small file helpers: whole-file read, atomic write (temp + rename), and
// SHA-256 digests for manifest bookkeeping.

#include <cstdint>
#include <string>

namespace scan {

std::string read_file(const std::string& path);

// Writes to a sibling temp file and renames over the target, so concurrent
// readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& bytes);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace scan
