#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nipot/sphere_geom.hpp"

namespace nipot {

/// Locale-independent decimal with 12 significant digits.
std::string format_number(double x);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

/// Table writer: leading `#` comment lines, then a header and rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void comment(const std::string& line);
  /// Comment lines written ahead of all others.
  void preamble(std::vector<std::string> lines);
  void add_row(std::vector<std::string> cells);
  void write(std::ostream& out) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

/// JSON text for a grid: {dim, nodes: [[re, im, ...]], weights}.
std::string grid_json(const QuadratureGrid& grid, const std::string& config_json);

}  // namespace nipot
