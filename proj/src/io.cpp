#include "dgs/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace dgs::io {
namespace {

static_assert(std::endian::native == std::endian::little, "NPY writer assumes a little-endian host");

constexpr char kMagic[] = "\x93NUMPY";

}  // namespace

void write_npy(const std::string& path, const Matrix& m) {
  std::ostringstream header;
  header << "{'descr': '<f8', 'fortran_order': False, 'shape': (" << m.rows() << ", " << m.cols() << "), }";
  std::string h = header.str();
  const std::size_t preamble = 6 + 2 + 2;
  const std::size_t total = ((preamble + h.size() + 1 + 63) / 64) * 64;
  h.append(total - preamble - h.size() - 1, ' ');
  h.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic, 6);
  const char version[2] = {1, 0};
  out.write(version, 2);
  const auto len = static_cast<std::uint16_t>(h.size());
  out.write(reinterpret_cast<const char*>(&len), 2);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = m;
  out.write(reinterpret_cast<const char*>(row_major.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(row_major.size())));
  if (!out) throw std::runtime_error("failed writing " + path);
}

Matrix read_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0) throw std::runtime_error(path + " is not an NPY file");
  unsigned char version[2];
  in.read(reinterpret_cast<char*>(version), 2);
  std::uint32_t len = 0;
  if (version[0] == 1) {
    std::uint16_t l16 = 0;
    in.read(reinterpret_cast<char*>(&l16), 2);
    len = l16;
  } else {
    in.read(reinterpret_cast<char*>(&len), 4);
  }
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw std::runtime_error("truncated NPY header in " + path);
  if (header.find("'<f8'") == std::string::npos) throw std::runtime_error("NPY dtype must be <f8");
  const bool fortran = header.find("'fortran_order': True") != std::string::npos;
  std::smatch match;
  static const std::regex shape_re(R"('shape':\s*\(\s*(\d+)\s*,?\s*(\d*)\s*,?\s*\))");
  if (!std::regex_search(header, match, shape_re)) throw std::runtime_error("unsupported NPY shape");
  const auto rows = static_cast<Eigen::Index>(std::stoll(match[1].str()));
  const auto cols = match[2].str().empty() ? Eigen::Index{1} : static_cast<Eigen::Index>(std::stoll(match[2].str()));
  std::vector<double> data(static_cast<std::size_t>(rows * cols));
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated NPY data in " + path);
  if (fortran) return Eigen::Map<const Matrix>(data.data(), rows, cols);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(),
                                                                                                   rows, cols);
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size()) throw std::runtime_error("CSV row width does not match header");
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols())
    throw DimensionError("CSV header width does not match the number of columns");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << values(i, j);
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header, const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out, header, values);
}

}  // namespace dgs::io
