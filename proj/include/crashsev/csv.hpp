#pragma once

// Small RFC-4180-style CSV reader/writer: quoted fields, doubled-quote
// escapes, embedded commas and newlines, CRLF tolerated.

#include <string>
#include <string_view>
#include <vector>

namespace crashsev {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, -1 when absent.
  int find_col(std::string_view name) const;
};

CsvTable parse_csv_text(std::string_view text);
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);
std::string to_csv_text(const CsvTable& table);

// Quotes a field only when needed.
std::string csv_field(std::string_view value);

}  // namespace crashsev
