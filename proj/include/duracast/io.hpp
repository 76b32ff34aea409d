#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace duracast {

/// Shortest text that round-trips a double exactly (at most 17 significant
/// digits).
std::string format_double(double value);

/// Parses a decimal real; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string> split(std::string_view text, char separator);

std::string_view trim(std::string_view text);

/// Comma-separated records with RFC 4180 double-quote escaping. Blank lines
/// are skipped.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view text);

}  // namespace duracast
