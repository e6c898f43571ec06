#include "dgs/state_space.hpp"
#include "dgs/targets.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <limits>
#include <set>
#include <utility>

using namespace dgs;
using dgs::testing::gradient_error;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

Matrix lattice_from_pairs(std::size_t rows, std::size_t cols, double theta, bool circular) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  auto id = [&](long r, long c) { return static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c); };
  const long R = static_cast<long>(rows), C = static_cast<long>(cols);
  for (long r = 0; r < R; ++r) {
    for (long c = 0; c < C; ++c) {
      const std::pair<long, long> steps[] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
      for (auto [dr, dc] : steps) {
        long rr = r + dr, cc = c + dc;
        if (circular) {
          rr = (rr + R) % R;
          cc = (cc + C) % C;
        } else if (rr < 0 || rr >= R || cc < 0 || cc >= C) {
          continue;
        }
        const auto a = id(r, c), b = id(rr, cc);
        if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
      }
    }
  }
  Matrix j = Matrix::Zero(static_cast<Eigen::Index>(rows * cols), static_cast<Eigen::Index>(rows * cols));
  for (auto [a, b] : edges) {
    j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = theta;
    j(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = theta;
  }
  return j;
}

// log p(y | mask) for the one-covariate model, integrating omega and sigma^2
// numerically. With no covariate only sigma^2 is integrated.
double log_evidence_quadrature(const Matrix& x, const Vector& y, const RegressionHyper& h, bool include_first) {
  using boost::math::quadrature::gauss_kronrod;
  const double n = static_cast<double>(y.size());
  const Vector x1 = x.col(0);
  const double gram = x1.squaredNorm();
  const double as = h.alpha_sigma, bs = h.beta_sigma;
  const double log_ig_norm = as * std::log(bs) - std::lgamma(as);
  const double inf = std::numeric_limits<double>::infinity();

  auto likelihood = [&](double omega, double s2) {
    const double rss = (y - omega * x1).squaredNorm();
    return -0.5 * n * std::log(2.0 * M_PI * s2) - 0.5 * rss / s2;
  };
  auto outer = [&](double s2) {
    const double log_prior_s2 = log_ig_norm - (as + 1.0) * std::log(s2) - bs / s2;
    if (!include_first) return std::exp(likelihood(0.0, s2) + log_prior_s2);
    const double v = h.g * s2 / (gram + h.lambda);
    auto inner = [&](double omega) {
      return std::exp(likelihood(omega, s2) + log_prior_s2 - 0.5 * std::log(2.0 * M_PI * v) -
                      0.5 * omega * omega / v);
    };
    return gauss_kronrod<double, 61>::integrate(inner, -inf, inf, 15, 1e-13);
  };
  return std::log(gauss_kronrod<double, 61>::integrate(outer, 0.0, inf, 15, 1e-13));
}

}  // namespace

TEST_CASE("Ising energy and gradient examples") {
  const IsingModel zero(Vector::Zero(3), Matrix::Zero(3, 3));
  CHECK(ising_log_f(zero, vec({1, -1, 1})) == 0.0);
  CHECK(ising_grad_f(zero, vec({1, -1, 1})) == Vector::Zero(3));

  Matrix j(2, 2);
  j << 0, 0.2, 0.2, 0;
  const IsingModel m(Vector::Zero(2), j);
  CHECK(ising_log_f(m, vec({1, 1})) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(ising_log_f(m, vec({1, -1})) == doctest::Approx(-0.2).epsilon(1e-14));
  const Vector g = ising_grad_f(m, vec({1, 1}));
  CHECK(g[0] == doctest::Approx(0.2));
  CHECK(g[1] == doctest::Approx(0.2));

  Matrix diag = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(IsingModel(Vector::Zero(2), diag), ParameterError);
  CHECK_THROWS_AS(m.log_f(Vector::Zero(3)), DimensionError);
}

TEST_CASE("Ising sign-flip symmetry") {
  Rng rng(3);
  const auto m = dgs::testing::random_ising(6, rng);
  const IsingModel flipped(-m.bias(), m.coupling());
  for (int t = 0; t < 20; ++t) {
    const Vector s = random_state(m.space(), 6, rng);
    CHECK(flipped.log_f(-s) == doctest::Approx(m.log_f(s)).epsilon(1e-13));
  }
}

TEST_CASE("lattice coupling matches a neighbour-pair construction") {
  const Matrix big = lattice_coupling(10, 10, 0.2, true);
  for (Eigen::Index i = 0; i < big.rows(); ++i) CHECK(big.row(i).sum() == doctest::Approx(0.8));
  CHECK((big - big.transpose()).norm() == 0.0);
  CHECK(big.diagonal().norm() == 0.0);

  Matrix pair(2, 2);
  pair << 0, 0.5, 0.5, 0;
  CHECK(lattice_coupling(1, 2, 0.5, false) == pair);

  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 3}, {2, 5}, {4, 4}, {1, 5}};
  for (auto [r, c] : shapes) {
    for (bool circ : {false, true}) {
      CAPTURE(r);
      CAPTURE(c);
      CAPTURE(circ);
      CHECK(lattice_coupling(r, c, 1.0, circ) == lattice_from_pairs(r, c, 1.0, circ));
    }
  }
  // 2x2 circular: wrap edges duplicate the direct ones, every node has two neighbours
  const Matrix small = lattice_coupling(2, 2, 1.0, true);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(small.row(i).sum() == 2.0);
  CHECK_THROWS_AS(lattice_coupling(0, 3, 1.0, true), ParameterError);
  CHECK(make_lattice_ising(3, 3, 0.2, true).bias() == Vector::Zero(9));
}

TEST_CASE("ordinal mixture single-component values") {
  const auto grid = make_ordinal_grid(50, -1.5, 3.0);
  const OrdinalPolyMixture p2(1, PolyFamily::SecondOrder, 1, grid);
  const OrdinalPolyMixture p4(1, PolyFamily::FourthOrder, 1, grid);
  for (double u : grid.values()) {
    const double t2 = u + 1.0 / 25.0;
    CHECK(p2.log_f(vec({u})) == doctest::Approx(1.5 - 2 * t2 - 6 * t2 * t2).epsilon(1e-13));
    const double t4 = 2 * u - 1 + 3.0 / 50.0;
    CHECK(p4.log_f(vec({u})) ==
          doctest::Approx(-t4 + t4 * t4 - t4 * t4 * t4 - t4 * t4 * t4 * t4).epsilon(1e-13));
    CHECK(p2.grad_f(vec({u}))[0] == doctest::Approx(p2.component_log_factor_derivative(1, u)).epsilon(1e-13));
  }
  CHECK(p2.component_log_factor_derivative(1, -1.0 / 25.0) == doctest::Approx(-2.0));
}

TEST_CASE("ordinal mixture log-sum-exp equals naive summation") {
  const auto grid = make_ordinal_grid(50, -1.5, 3.0);
  for (auto family : {PolyFamily::SecondOrder, PolyFamily::FourthOrder}) {
    const OrdinalPolyMixture t(2, family, 3, grid);
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector s = random_state(grid, 2, rng);
      double naive = 0.0;
      for (std::size_t k = 1; k <= 3; ++k)
        naive += std::exp(t.component_log_factor(k, s[0]) + t.component_log_factor(k, s[1]));
      CHECK(std::exp(t.log_f(s)) == doctest::Approx(naive).epsilon(1e-12));
    }
  }
}

TEST_CASE("ordinal mixture is finite on the lattice") {
  const auto grid = make_ordinal_grid(50, -1.5, 3.0);
  const OrdinalPolyMixture t(1, PolyFamily::FourthOrder, 50, grid);
  for (double u : grid.values()) CHECK(std::isfinite(t.log_f(vec({u}))));
  const OrdinalPolyMixture big(20, PolyFamily::FourthOrder);
  CHECK(std::isfinite(big.log_f(Vector::Constant(20, 3.0))));
  CHECK(std::isfinite(big.log_f(Vector::Constant(20, -1.5))));
}

TEST_CASE("finite-difference gradients for every target family") {
  Rng rng(2024);
  const auto ising = dgs::testing::random_ising(10, rng);
  const OrdinalPolyMixture poly2(20, PolyFamily::SecondOrder);
  const OrdinalPolyMixture poly4(20, PolyFamily::FourthOrder);
  Rng data_rng(5);
  const auto data = make_regression_dataset(data_rng);
  const SparseRegressionPosterior reg(data.x, data.y, {}, 5, 0.001);
  const Target* targets[] = {&ising, &poly2, &poly4, &reg};
  for (const Target* t : targets) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector s = random_state(t->space(), t->sites(), rng);
      worst = std::max(worst, gradient_error(*t, s));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("regression empty mask") {
  Rng rng(1);
  const auto data = make_regression_dataset(rng, 20, 5, 8);
  const RegressionHyper h;
  const SparseRegressionPosterior t(data.x, data.y, h, 3, 0.001);
  const double n = 20.0, d = 8.0;
  const double expected = std::lgamma(h.alpha_pi) + std::lgamma(d + h.beta_pi) + 3 * std::log1p(-0.001) -
                          0.5 * (2 * h.alpha_sigma + n) * std::log(2 * h.beta_sigma + data.y.squaredNorm());
  CHECK(t.log_f(Vector::Zero(11)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("regression mask value matches integrated likelihood") {
  Matrix x(4, 2);
  x << 1, 0, 2, 1, 0, 1, 1, 2;
  const Vector y = vec({1.2, 2.1, 0.3, 0.9});
  const RegressionHyper h;
  const SparseRegressionPosterior t(x, y, h);
  const double quad = log_evidence_quadrature(x, y, h, true) - log_evidence_quadrature(x, y, h, false);
  const double prior = std::lgamma(1 + h.alpha_pi) + std::lgamma(1 + h.beta_pi) - std::lgamma(h.alpha_pi) -
                       std::lgamma(2 + h.beta_pi);
  const double diff = t.log_f(vec({1, 0})) - t.log_f(vec({0, 0}));
  CHECK(diff == doctest::Approx(quad + prior).epsilon(1e-7));
}

TEST_CASE("regression one-covariate symbolic derivative") {
  Matrix x(3, 1);
  x << 1, 2, 1;
  const Vector y = vec({1.0, 2.5, 0.5});
  const RegressionHyper h;
  const SparseRegressionPosterior t(x, y, h);
  const double gram = x.squaredNorm(), c0 = x.col(0).dot(y), n = 3.0;
  for (double s : {0.0, 0.3, 1.0}) {
    const double a = gram * s * s + h.lambda;
    const double b = (1 + h.g) * gram * s * s + h.lambda;
    const double q = 2 * h.beta_sigma + y.squaredNorm() - h.g * s * s * c0 * c0 / b;
    const double e = (2 * h.alpha_sigma + n) / 2;
    const double dq = -2 * h.g * c0 * c0 * s * h.lambda / (b * b);
    const double expected = boost::math::digamma(s + h.alpha_pi) - boost::math::digamma(1 - s + h.beta_pi) +
                            h.det_power * (2 * gram * s / a - 2 * (1 + h.g) * gram * s / b) - e * dq / q;
    CHECK(t.grad_f(vec({s}))[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("regression block route agrees with the full route") {
  Rng rng(9);
  const auto data = make_regression_dataset(rng, 20, 5, 8);
  const SparseRegressionPosterior t(data.x, data.y);
  for_each_state(t.space(), 8, 1 << 8, [&](const Vector& s, std::size_t) {
    std::vector<bool> mask(8);
    for (int i = 0; i < 8; ++i) mask[static_cast<std::size_t>(i)] = s[i] == 1.0;
    CHECK(std::isfinite(t.log_f(s)));
    CHECK(t.block_log_f(mask) == doctest::Approx(t.log_f(s)).epsilon(1e-9));
  });
}

TEST_CASE("regression normalizer is reproducible and factorizes against padding") {
  Rng r1(13), r2(13);
  const auto d1 = make_regression_dataset(r1, 20, 5, 8);
  const auto d2 = make_regression_dataset(r2, 20, 5, 8);
  const auto m1 = SparseRegressionPosterior(d1.x, d1.y).exact_block_moments();
  const auto m2 = SparseRegressionPosterior(d2.x, d2.y).exact_block_moments();
  CHECK(std::isfinite(m1.log_z));
  CHECK(m1.log_z == m2.log_z);

  const SparseRegressionPosterior padded(d1.x.leftCols(4), d1.y, {}, 3, 0.2);
  std::vector<double> all;
  for_each_state(padded.space(), 7, 1 << 7, [&](const Vector& s, std::size_t) { all.push_back(padded.log_f(s)); });
  const double block = padded.exact_block_moments().log_z;
  // the padding block sums to one
  CHECK(log_sum_exp(all) == doctest::Approx(block).epsilon(1e-12));

  const auto [p1, p11] = padded.exact_moments();
  CHECK(p1[6] == doctest::Approx(0.2));
  CHECK(p11(4, 5) == doctest::Approx(0.04));
  CHECK(p11(0, 6) == doctest::Approx(p1[0] * 0.2));
}

TEST_CASE("regression padding gradient is the Bernoulli logit") {
  Rng rng(4);
  const auto data = make_regression_dataset(rng);
  const SparseRegressionPosterior t(data.x, data.y, {}, 80, 0.001);
  CHECK(t.dim() == 100);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector s = random_state(t.space(), 100, rng);
    const Vector g = t.grad_f(s);
    for (Eigen::Index i = 20; i < 100; ++i) CHECK(g[i] == doctest::Approx(std::log(0.001 / 0.999)).epsilon(1e-12));
  }
}

TEST_CASE("regression dataset layout") {
  Rng rng(21);
  const auto data = make_regression_dataset(rng);
  REQUIRE(data.x.rows() == 20);
  REQUIRE(data.x.cols() == 20);
  // 1-based x_6 == x_2
  CHECK(data.x.col(5) == data.x.col(1));
  for (Eigen::Index j = 5; j < 20; ++j) CHECK(data.x.col(j) == data.x.col((j + 1) % 5));
  CHECK(data.y.minCoeff() >= 0.0);
  CHECK(data.y.maxCoeff() <= 10.0);
  CHECK(((data.x.array() == 0) || (data.x.array() == 1) || (data.x.array() == 2)).all());
  CHECK((data.y - data.x.leftCols(5).rowwise().sum()).norm() == 0.0);
}
