#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mbsa::io {

/// Shortest decimal text that parses back to the same double ('.' separator, no locale).
std::string format_double(double v);

/// Parses a full field as a double; throws ParseError naming `row` and `col` on failure.
double parse_double(std::string_view field, std::size_t row, std::size_t col);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;  // throws ParseError when absent
};

/// Numeric CSV with a single header line. Blank lines are skipped.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

void write_csv_row(std::ostream& os, const std::vector<double>& values);
void write_csv_header(std::ostream& os, const std::vector<std::string>& names);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mbsa::io
