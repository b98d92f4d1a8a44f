#include "blocklab/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blocklab {

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

int CsvTable::column(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("csv: missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  size_t pos = 0;
  int line_no = 0;
  auto split_line = [](std::string_view line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      if (comma == std::string_view::npos) {
        out.emplace_back(line.substr(start));
        return out;
      }
      out.emplace_back(line.substr(start, comma - start));
      start = comma + 1;
    }
  };
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
    } else {
      if (fields.size() != table.header.size())
        throw std::invalid_argument("csv: row " + std::to_string(line_no) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(table.header.size()));
      table.rows.push_back(std::move(fields));
    }
  }
  if (table.header.empty()) throw std::invalid_argument("csv: empty input");
  return table;
}

CsvTable read_csv_file(const std::string& path) { return parse_csv(read_file(path)); }

void write_file(const std::string& path, std::string_view content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw std::runtime_error("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::optional<double> parse_optional_double(std::string_view cell, int row, int col) {
  if (cell == "-") return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || p != cell.data() + cell.size())
    throw std::invalid_argument("csv: bad numeric value '" + std::string(cell) + "' at row " +
                                std::to_string(row) + ", column " + std::to_string(col));
  return v;
}

}  // namespace blocklab
