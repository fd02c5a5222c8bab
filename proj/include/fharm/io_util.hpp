#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fharm {

// FNV-1a 64-bit, used to fingerprint artifact files and tie stages together.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);
std::string checksum_hex(std::uint64_t h);

// Numbers are always written with 17 significant digits so that re-reading
// reproduces the exact double.
std::string fmt17(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);

// split helpers for the plain-text formats
std::vector<std::string> split_ws(const std::string& line);
std::string trim(const std::string& s);

} // namespace fharm
