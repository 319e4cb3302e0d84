#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ntd {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Shortest decimal form that parses back to the same double.
std::string fmt_double(double v);
/// %.9g-style form, 9 significant digits.
std::string fmt_double_sig9(double v);

/// Strict double parse; throws on trailing garbage or empty input.
double parse_double(const std::string& s);

/// One CSV record. Handles quoted fields with embedded commas and "" escapes;
/// fields never span lines.
std::vector<std::string> split_csv_line(const std::string& line);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64(const std::string& s);
/// "fnv1a64:" + 16 hex digits over the file content.
std::string file_content_hash(const std::string& path);

/// Thread budget for parallel sections: NTD_THREADS if set, else hardware
/// concurrency, at least 1.
unsigned env_threads();

}  // namespace ntd
