#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blocklab {

// Shortest round-trip decimal form, so CSV values parse back bit-exactly.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const;  // throws if missing
};

// Strict comma-separated parser (no quoting; our writers never emit commas
// inside fields). Malformed input is rejected with row/column diagnostics.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::string& path);

void write_file(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

// Numeric cell helpers; "-" means absent.
std::optional<double> parse_optional_double(std::string_view cell, int row, int col);

}  // namespace blocklab
