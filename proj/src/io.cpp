#include "nipot/io.hpp"

#include <charconv>
#include <cmath>

namespace nipot {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::comment(const std::string& line) { comments_.push_back(line); }

void CsvTable::preamble(std::vector<std::string> lines) {
  lines.insert(lines.end(), comments_.begin(), comments_.end());
  comments_ = std::move(lines);
}

void CsvTable::add_row(std::vector<std::string> cells) {
  require(cells.size() == columns_.size(), "row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& out) const {
  for (const auto& c : comments_) out << "# " << c << "\r\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << csv_field(cells[i]);
    }
    out << "\r\n";
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
}

std::string grid_json(const QuadratureGrid& grid, const std::string& config_json) {
  std::string out = "{\"version\":\"" + std::string(kVersion) + "\",\"config\":" + config_json +
                    ",\"dim\":" + std::to_string(grid.dim()) + ",\"nodes\":[";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j) out += ',';
    out += '[';
    for (int k = 0; k < grid.dim(); ++k) {
      const Complex c = grid.node(j).c[static_cast<std::size_t>(k)];
      if (k) out += ',';
      out += format_number(c.real()) + ',' + format_number(c.imag());
    }
    out += ']';
  }
  out += "],\"weights\":[";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j) out += ',';
    out += format_number(grid.weight(j));
  }
  out += "]}\n";
  return out;
}

}  // namespace nipot
