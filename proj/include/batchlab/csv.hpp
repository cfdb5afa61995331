#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace batchlab::csv {

/// Plain comma-separated table. Fields never contain commas or quotes in the
/// formats this project reads, so no quoting is supported.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, throws IoError if absent.
  std::size_t column(std::string_view name) const;
};

std::vector<std::string> split_line(std::string_view line);

/// Reads a file with a mandatory header line. Blank lines are skipped.
Table read(const std::filesystem::path& path);

/// Throws IoError when the header does not match `expected` exactly.
void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path);

long long to_int(std::string_view field, const std::filesystem::path& path);
double to_double(std::string_view field, const std::filesystem::path& path);

/// Shortest round-trippable decimal form of a double.
std::string format_double(double value);

}  // namespace batchlab::csv
