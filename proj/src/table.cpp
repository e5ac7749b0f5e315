#include "kbreg/table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kbreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, int line_no, size_t col) {
  const std::string t = trim(cell);
  if (t.empty())
    throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                     ": empty cell");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                     ": non-numeric value '" + t + "'");
  if (!std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                     ": non-finite value '" + t + "'");
  return v;
}

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

RawCsv read_raw_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  RawCsv raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;  // metadata/comment lines
    if (trim(line).empty())
      throw ParseError("line " + std::to_string(line_no) + ": blank line");
    if (raw.header.empty()) {
      raw.header = split_csv_line(line);
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != raw.header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(raw.header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) row[c] = parse_cell(cells[c], line_no, c);
    raw.rows.push_back(std::move(row));
  }
  if (raw.header.empty()) throw ParseError("'" + path + "': missing header row");
  return raw;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void TableOutput::add_column(const std::string& name, Vector values) {
  if (!data.empty() && values.size() != data.front().size())
    throw DimensionMismatch("TableOutput: column '" + name + "' has " +
                            std::to_string(values.size()) + " rows, table has " +
                            std::to_string(data.front().size()));
  columns.push_back(name);
  data.push_back(std::move(values));
}

Index TableOutput::rows() const { return data.empty() ? 0 : data.front().size(); }

std::string TableOutput::to_csv() const {
  std::ostringstream out;
  for (const auto& [key, value] : metadata) out << "# " << key << " = " << value << "\n";
  for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << "\n";
  for (Index r = 0; r < rows(); ++r) {
    for (size_t c = 0; c < data.size(); ++c)
      out << (c ? "," : "") << format_double(data[c](r));
    out << "\n";
  }
  return out.str();
}

void TableOutput::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << to_csv();
}

Dataset ingest_csv(const std::string& path) {
  const RawCsv raw = read_raw_csv(path);
  if (raw.header.size() < 2)
    throw ParseError("'" + path + "': need at least one input column and the output column 'y'");
  if (raw.header.back() != "y")
    throw ParseError("'" + path + "': last column must be named 'y', got '" + raw.header.back() +
                     "'");
  if (raw.rows.empty()) throw EmptyDataset("'" + path + "': no data rows");

  const size_t d = raw.header.size() - 1;
  Matrix inputs(static_cast<Index>(raw.rows.size()), static_cast<Index>(d));
  Vector outputs(static_cast<Index>(raw.rows.size()));
  for (size_t r = 0; r < raw.rows.size(); ++r) {
    for (size_t c = 0; c < d; ++c) inputs(static_cast<Index>(r), static_cast<Index>(c)) = raw.rows[r][c];
    outputs(static_cast<Index>(r)) = raw.rows[r].back();
  }
  return Dataset::make(std::move(inputs), std::move(outputs));
}

Matrix read_matrix_csv(const std::string& path) {
  const RawCsv raw = read_raw_csv(path);
  if (raw.rows.empty()) throw EmptyDataset("'" + path + "': no data rows");
  Matrix m(static_cast<Index>(raw.rows.size()), static_cast<Index>(raw.header.size()));
  for (size_t r = 0; r < raw.rows.size(); ++r)
    for (size_t c = 0; c < raw.header.size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = raw.rows[r][c];
  return m;
}

}  // namespace kbreg
