#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace debtav::csv {

struct Row {
  std::size_t line = 0;  ///< 1-based line in the source
  std::vector<std::string> fields;
};

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of a header column; throws ParseError when absent.
  std::size_t column(std::string_view name) const;
};

/// Parses comma-separated text with optional double-quoted fields. Blank
/// lines are skipped. An empty input yields an empty header and no rows.
Table parse(std::istream& in, const std::string& source);
Table read_file(const std::filesystem::path& path);

/// Requires the header to equal `expected` exactly.
void require_header(const Table& table, const std::vector<std::string>& expected);

std::string escape(std::string_view field);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

double parse_double(const Table& table, const Row& row, std::size_t column);
long long parse_int(const Table& table, const Row& row, std::size_t column);

}  // namespace debtav::csv
