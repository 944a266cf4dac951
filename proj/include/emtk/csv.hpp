#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace emtk {

// Minimal RFC 4180 field splitting: commas, double-quoted fields with ""
// escapes. No embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row

  // Column index by header name, or npos.
  std::size_t column(std::string_view name) const;
};

// Reads a header line then data lines. Blank lines are skipped; a UTF-8 BOM
// and trailing \r are stripped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string csv_escape(std::string_view field);

}  // namespace emtk
