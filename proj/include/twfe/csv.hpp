#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "twfe/panel.hpp"

namespace twfe {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(const std::string& name) const;
  /// Throws MissingColumn.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated, header row, optional double-quoted fields ("" escapes a
/// quote). A UTF-8 byte-order mark on the first line is ignored.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Column names for long-format panel input. `unit` and `count` default to
/// columns literally named "unit" / "count" when present.
struct ColumnMap {
  std::string group = "group";
  std::string time = "time";
  std::string outcome = "outcome";
  std::string treatment = "treatment";
  std::optional<std::string> unit;
  std::optional<std::string> count;
};

std::vector<Observation> observations_from_csv(const CsvTable& table, const ColumnMap& columns);

/// Parses a numeric field; throws ParseError naming the row and column.
double parse_double(const std::string& field, std::size_t row, const std::string& column);

}  // namespace twfe
