#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phylokit {

std::string read_text_file(const std::string& path);
std::vector<std::uint8_t> read_binary_file(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file. Parent directories must exist.
void write_file_atomic(const std::string& path, const std::string& contents);
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& contents);

void ensure_directory(const std::string& path);

}  // namespace phylokit
