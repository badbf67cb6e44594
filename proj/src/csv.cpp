#include "twfe/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "twfe/error.hpp"

namespace twfe {
namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw Error(ErrorCode::ParseError, "unterminated quote on line " + std::to_string(line_no));
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

std::size_t CsvTable::column(const std::string& name) const {
  if (auto idx = find_column(name)) return *idx;
  throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_line(line, line_no);
    for (auto& f : fields) f = trim(std::move(f));
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::EmptyInput, "CSV input has no header row");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_csv(in);
}

double parse_double(const std::string& field, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    throw Error(ErrorCode::ParseError, "row " + std::to_string(row + 1) + ", column '" + column +
                                           "': '" + field + "' is not a finite number");
  return value;
}

std::vector<Observation> observations_from_csv(const CsvTable& table, const ColumnMap& columns) {
  const std::size_t group_col = table.column(columns.group);
  const std::size_t time_col = table.column(columns.time);
  const std::size_t outcome_col = table.column(columns.outcome);
  const std::size_t treatment_col = table.column(columns.treatment);
  const std::optional<std::size_t> unit_col =
      columns.unit ? std::optional(table.column(*columns.unit)) : table.find_column("unit");
  const std::optional<std::size_t> count_col =
      columns.count ? std::optional(table.column(*columns.count)) : table.find_column("count");

  std::vector<Observation> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Observation obs;
    obs.group = row[group_col];
    obs.time = row[time_col];
    if (obs.group.empty() || obs.time.empty())
      throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) + " has an empty group or time");
    obs.outcome = parse_double(row[outcome_col], r, columns.outcome);
    obs.treatment = parse_double(row[treatment_col], r, columns.treatment);
    if (unit_col) obs.unit = row[*unit_col];
    if (count_col) {
      const double c = parse_double(row[*count_col], r, table.header[*count_col]);
      if (c < 1.0 || c != std::floor(c))
        throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) +
                                               ": count must be a positive integer");
      obs.count = static_cast<std::int64_t>(c);
    }
    out.push_back(std::move(obs));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "CSV input has no data rows");
  return out;
}

}  // namespace twfe
