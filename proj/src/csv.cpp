#include "batchlab/csv.hpp"

#include <charconv>
#include <fstream>

#include "batchlab/errors.hpp"

namespace batchlab::csv {

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("missing column '" + std::string(name) + "'");
}

std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Table table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw IoError(path.string() + ": row has " + std::to_string(fields.size()) +
                    " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw IoError(path.string() + ": missing header line");
  return table;
}

void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw IoError(path.string() + ": expected header '" + want + "'");
  }
}

long long to_int(std::string_view field, const std::filesystem::path& path) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw IoError(path.string() + ": not an integer: '" + std::string(field) + "'");
  return value;
}

double to_double(std::string_view field, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    std::string s(field);
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": not a number: '" + std::string(field) + "'");
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace batchlab::csv
