#pragma once

#include "dgs/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dgs::io {

/// NPY v1.0, little-endian float64, C order, 2-D.
void write_npy(const std::string& path, const Matrix& m);
Matrix read_npy(const std::string& path);

/// Numeric CSV with a single header row.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values);
void write_csv_file(const std::string& path, const std::vector<std::string>& header, const Matrix& values);

}  // namespace dgs::io
