#include "dgs/chains.hpp"
#include "dgs/io.hpp"
#include "dgs/samplers.hpp"
#include "dgs/targets.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace dgs;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "dgs_io_test") {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("npy round trip and layout") {
  TempDir dir;
  Rng rng(1);
  for (auto [r, c] : {std::pair{1, 1}, {3, 5}, {7, 2}, {0, 4}}) {
    Matrix m(r, c);
    for (auto& x : m.reshaped()) x = rng.normal();
    const auto path = dir.file("m.npy");
    io::write_npy(path, m);
    CHECK(io::read_npy(path) == m);

    const auto bytes = slurp(path);
    CHECK(bytes.substr(0, 6) == "\x93NUMPY");
    const auto header_len = static_cast<unsigned char>(bytes[8]) + 256u * static_cast<unsigned char>(bytes[9]);
    CHECK((10 + header_len) % 64 == 0);
    CHECK(bytes[9 + header_len] == '\n');
    CHECK(bytes.size() == 10 + header_len + sizeof(double) * static_cast<std::size_t>(r * c));
  }

  // row-major payload: the second double on disk is m(0, 1)
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  io::write_npy(dir.file("order.npy"), m);
  const auto bytes = slurp(dir.file("order.npy"));
  double second = 0.0;
  std::memcpy(&second, bytes.data() + bytes.size() - 3 * sizeof(double), sizeof(double));
  CHECK(second == 2.0);
}

TEST_CASE("npy reader accepts fortran order and rejects other dtypes") {
  TempDir dir;
  auto write_raw = [&](const std::string& name, const std::string& dict, const std::vector<double>& payload) {
    std::string h = dict;
    h.append(64 - (10 + h.size() + 1) % 64, ' ');
    h.push_back('\n');
    std::ofstream out(dir.file(name), std::ios::binary);
    out.write("\x93NUMPY\x01\x00", 8);
    const auto len = static_cast<std::uint16_t>(h.size());
    out.write(reinterpret_cast<const char*>(&len), 2);
    out << h;
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(8 * payload.size()));
  };
  write_raw("f.npy", "{'descr': '<f8', 'fortran_order': True, 'shape': (2, 3), }", {1, 2, 3, 4, 5, 6});
  const Matrix f = io::read_npy(dir.file("f.npy"));
  CHECK(f(0, 1) == 3.0);
  CHECK(f(1, 0) == 2.0);

  write_raw("v.npy", "{'descr': '<f8', 'fortran_order': False, 'shape': (3,), }", {1, 2, 3});
  const Matrix v = io::read_npy(dir.file("v.npy"));
  CHECK(v.rows() == 3);
  CHECK(v.cols() == 1);

  write_raw("i.npy", "{'descr': '<i4', 'fortran_order': False, 'shape': (2, 1), }", {1});
  CHECK_THROWS(io::read_npy(dir.file("i.npy")));
  write_raw("short.npy", "{'descr': '<f8', 'fortran_order': False, 'shape': (4, 4), }", {1, 2});
  CHECK_THROWS(io::read_npy(dir.file("short.npy")));
  std::ofstream(dir.file("junk.npy")) << "hello";
  CHECK_THROWS(io::read_npy(dir.file("junk.npy")));
  CHECK_THROWS(io::read_npy(dir.file("missing.npy")));
}

TEST_CASE("csv round trip") {
  TempDir dir;
  Rng rng(2);
  Matrix m(4, 3);
  for (auto& x : m.reshaped()) x = rng.normal() * 1e3;
  io::write_csv_file(dir.file("t.csv"), {"a", "b", "c"}, m);
  const auto t = io::read_csv_file(dir.file("t.csv"));
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  CHECK(t.values == m);

  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS(io::read_csv(ragged));
  std::istringstream text("a\nx\n");
  CHECK_THROWS(io::read_csv(text));
  std::istringstream empty("");
  CHECK_THROWS(io::read_csv(empty));
  std::ostringstream out;
  CHECK_THROWS_AS(io::write_csv(out, {"a"}, m), DimensionError);
}

TEST_CASE("state dumps read back as states") {
  Rng rng(3);
  const auto grid = make_ordinal_grid(50, -1.5, 3.0);
  Matrix states(5, 4);
  for (Eigen::Index r = 0; r < 5; ++r) states.row(r) = random_state(grid, 4, rng).transpose();
  std::stringstream buf;
  write_states_csv(buf, states);
  const auto t = io::read_csv(buf);
  CHECK(t.header == std::vector<std::string>{"dim_0", "dim_1", "dim_2", "dim_3"});
  CHECK(t.values == states);
}

TEST_CASE("trace csv columns") {
  Rng rng(4);
  const auto t = dgs::testing::random_ising(3, rng);
  ChainEnsemble e(t, 2, 5);
  SamplerConfig c;
  c.kind = SamplerKind::GWG;
  RunOptions opt;
  opt.n_steps = 3;
  const auto trace = run_chain(t, c, e, opt);
  std::stringstream buf;
  trace.write_csv(buf);
  const auto table = io::read_csv(buf);
  CHECK(table.header == std::vector<std::string>{"step", "chain", "accepted", "log_accept_ratio", "l1_jump"});
  REQUIRE(table.values.rows() == 6);
  for (Eigen::Index r = 0; r < 6; ++r) {
    const auto step = static_cast<std::size_t>(table.values(r, 0));
    const auto chain = static_cast<std::size_t>(table.values(r, 1));
    CHECK(table.values(r, 2) == trace.accepted[trace.index(step, chain)]);
    CHECK(table.values(r, 4) == trace.l1_jump[trace.index(step, chain)]);
  }
}

TEST_CASE("regression dataset csv") {
  Rng rng(6);
  const auto data = make_regression_dataset(rng);
  std::stringstream buf;
  write_regression_csv(buf, data);
  const auto t = io::read_csv(buf);
  REQUIRE(t.values.cols() == 21);
  CHECK(t.header.front() == "x_0");
  CHECK(t.header.back() == "y");
  CHECK(t.values.leftCols(20) == data.x);
  CHECK(t.values.col(20) == data.y);
}
