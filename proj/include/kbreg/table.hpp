#pragma once

#include <map>
#include <string>
#include <vector>

#include "kbreg/dataset.hpp"

namespace kbreg {

// Rectangular named columns plus a metadata map, serialized as CSV with
// leading "# key = value" comment lines. Numbers are written with 17
// significant digits so reruns are byte-identical.
struct TableOutput {
  std::vector<std::string> columns;
  std::vector<Vector> data;
  std::map<std::string, std::string> metadata;

  void add_column(const std::string& name, Vector values);
  Index rows() const;
  std::string to_csv() const;
  void write(const std::string& path) const;
};

std::string format_double(double v);

// Expects a header row naming d input columns followed by one output column
// "y". Blank lines, non-numeric cells, NaN and infinities are rejected with
// the offending location.
Dataset ingest_csv(const std::string& path);

// Header plus purely numeric columns (used for explicit test-point files).
Matrix read_matrix_csv(const std::string& path);

}  // namespace kbreg
