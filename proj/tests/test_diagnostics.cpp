#include "dgs/diagnostics.hpp"
#include "dgs/parallel.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>

using namespace dgs;

namespace {

// Autocorrelation by direct sums at every lag, then the same pairwise
// truncation and cap as the library.
double brute_ess(const Vector& x) {
  const auto n = x.size();
  const double m = x.mean();
  std::vector<double> rho(static_cast<std::size_t>(n));
  double c0 = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) c0 += (x[t] - m) * (x[t] - m);
  for (Eigen::Index k = 0; k < n; ++k) {
    double c = 0.0;
    for (Eigen::Index t = 0; t + k < n; ++t) c += (x[t] - m) * (x[t + k] - m);
    rho[static_cast<std::size_t>(k)] = c / c0;
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; 2 * k < n; ++k) {
    const double pair = rho[2 * k] + (2 * k + 1 < n ? rho[2 * k + 1] : 0.0);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

Vector ar1(std::size_t n, double phi, Rng& rng) {
  Vector x(n);
  x[0] = rng.normal() / std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 1; t < n; ++t) x[t] = phi * x[t - 1] + rng.normal();
  return x;
}

}  // namespace

TEST_CASE("marginal KL examples") {
  Matrix q(1, 2), p(1, 2);
  q << 1.0, 0.0;
  p << 0.5, 0.5;
  CHECK(marginal_kl(q, p, 100) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(marginal_kl(p, p, 100) == 0.0);

  // q > 0 where p = 0 uses the floor 1 / (n k)
  Matrix q2(1, 2), p2(1, 2);
  q2 << 0.5, 0.5;
  p2 << 1.0, 0.0;
  CHECK(marginal_kl(q2, p2, 10) == doctest::Approx(0.5 * std::log(0.5) + 0.5 * std::log(0.5 * 20)).epsilon(1e-14));

  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    Matrix a = Matrix::Zero(4, 6), b = Matrix::Zero(4, 6);
    for (auto& x : a.reshaped()) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    for (auto& x : b.reshaped()) x = rng.uniform() + 1e-3;
    a = a.array().colwise() / a.rowwise().sum().array().max(1e-300);
    b = b.array().colwise() / b.rowwise().sum().array();
    CHECK(marginal_kl(a, b, 1000) >= 0.0);
  }
  CHECK_THROWS_AS(marginal_kl(Matrix::Zero(2, 3), Matrix::Zero(3, 3), 1), DimensionError);
}

TEST_CASE("covariance and absolute marginal error") {
  Matrix a(1, 1), b(1, 1);
  a << 2.0;
  b << 0.5;
  CHECK(covariance_error(a, b) == doctest::Approx(1.5));
  CHECK(covariance_error(b, b) == 0.0);
  const Matrix x = Matrix::Identity(3, 3), y = 2.0 * Matrix::Identity(3, 3);
  CHECK(covariance_error(x, y) == doctest::Approx(std::sqrt(3.0)));
  CHECK(marginal_abs_error((Vector(2) << 0.5, 0.2).finished(), (Vector(2) << 0.3, 0.4).finished()) ==
        doctest::Approx(0.2));
}

TEST_CASE("pairwise error toy and bounds") {
  // independent uniform against perfectly correlated bits, d = 2
  const Vector upper = Vector::Constant(2, 0.5);
  Matrix indep(2, 2), corr(2, 2);
  indep << 0.5, 0.25, 0.25, 0.5;
  corr << 0.5, 0.5, 0.5, 0.5;
  // every off-diagonal cell differs by 1/4; the diagonal agrees
  CHECK(pairwise_error(upper, indep, upper, corr) == doctest::Approx(4 * 2 * 0.25 / 4));
  CHECK(pairwise_error(upper, corr, upper, corr) == 0.0);

  // random joint laws over {0,1}^3, bound by enumeration
  Rng rng(2);
  auto moments = [](const Vector& probs, Vector& up, Matrix& pair) {
    up = Vector::Zero(3);
    pair = Matrix::Zero(3, 3);
    for (int s = 0; s < 8; ++s) {
      Vector on(3);
      for (int i = 0; i < 3; ++i) on[i] = (s >> (2 - i)) & 1;
      up += probs[s] * on;
      pair += probs[s] * on * on.transpose();
    }
  };
  Vector uq, up;
  Matrix pq, pp;
  for (int t = 0; t < 200; ++t) {
    Vector a(8), b(8);
    for (auto& v : a) v = std::pow(rng.uniform(), 4);
    for (auto& v : b) v = std::pow(rng.uniform(), 4);
    moments(a / a.sum(), uq, pq);
    moments(b / b.sum(), up, pp);
    const double e = pairwise_error(uq, pq, up, pp);
    CHECK(e >= 0.0);
    CHECK(e <= 2.0 + 1e-12);
  }
  Vector lo = Vector::Zero(8), hi = Vector::Zero(8);
  lo[0] = 1.0;
  hi[7] = 1.0;
  moments(lo, uq, pq);
  moments(hi, up, pp);
  CHECK(pairwise_error(uq, pq, up, pp) == doctest::Approx(2.0));
}

TEST_CASE("ESS agrees with a direct computation") {
  Rng rng(3);
  for (double phi : {0.0, 0.3, 0.9, -0.4}) {
    for (std::size_t n : {50, 333, 1000}) {
      const Vector x = ar1(n, phi, rng);
      CHECK(ess(x) == doctest::Approx(brute_ess(x)).epsilon(1e-9));
    }
  }
  Vector alt(100);
  for (Eigen::Index i = 0; i < 100; ++i) alt[i] = i % 2 ? 1.0 : -1.0;
  CHECK(ess(alt) == doctest::Approx(brute_ess(alt)).epsilon(1e-9));
  CHECK(ess(alt) <= 100.0 * std::log10(100.0) + 1e-9);

  const Vector rho = autocorrelation(ar1(200, 0.5, rng));
  CHECK(rho[0] == doctest::Approx(1.0));
}

TEST_CASE("ESS reference behavior") {
  Rng rng(4);
  const std::size_t n = 10000;
  const double iid = ess(ar1(n, 0.0, rng)) / n;
  CHECK(iid >= 0.8);
  CHECK(iid <= 1.2);

  double mean = 0.0;
  for (int r = 0; r < 10; ++r) mean += ess(ar1(n, 0.5, rng)) / n / 10.0;
  CHECK(mean == doctest::Approx(1.0 / 3.0).epsilon(0.2));

  CHECK(ess(Vector(Vector::Constant(100, 4.0))) == 0.0);

  Matrix traces(n, 3);
  for (int c = 0; c < 3; ++c) traces.col(c) = ar1(n, 0.0, rng);
  const Vector per = ess(traces);
  REQUIRE(per.size() == 3);
  for (int c = 0; c < 3; ++c) CHECK(per[c] == doctest::Approx(ess(Vector(traces.col(c)))));
}

TEST_CASE("L1 statistic") {
  Matrix s(2, 3);
  s << 1, 2, 3, 0, 0, 0;
  const Vector ref = (Vector(3) << 1, 1, 1).finished();
  const Vector out = l1_statistic(s, ref);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 3.0);
}

TEST_CASE("chain statistics fold repeats") {
  const auto space = StateSpace::binary01();
  ChainStatistics stats(space, 2, true, true);
  const Vector a = (Vector(2) << 1, 0).finished(), b = (Vector(2) << 1, 1).finished();
  for (int i = 0; i < 3; ++i) stats.add(a);
  stats.add(b);
  CHECK(stats.count() == 4.0);
  CHECK(stats.marginals()(0, 1) == 1.0);
  CHECK(stats.marginals()(1, 1) == 0.25);
  CHECK(stats.upper()[1] == 0.25);
  CHECK(stats.upper_pair()(0, 1) == 0.25);
  CHECK(stats.upper_pair()(0, 0) == 1.0);
  CHECK(stats.mean()[1] == 0.25);
  CHECK(stats.covariance()(1, 1) == doctest::Approx(0.25 * 0.75 * 4.0 / 3.0));
  CHECK(stats.covariance()(0, 0) == doctest::Approx(0.0));

  // identical sample sets give zero covariance error
  ChainStatistics again(space, 2, true, false);
  for (const auto& s : {a, a, a, b}) again.add(s);
  CHECK(covariance_error(stats.covariance(), again.covariance()) < 1e-15);
}

TEST_CASE("exact oracle on small targets") {
  const QuadraticTarget flat(make_ordinal_grid(4, 0.0, 1.0), Vector::Zero(3), Matrix::Zero(3, 3));
  const auto uniform = exact_distribution(flat);
  CHECK(uniform.probs.size() == 64);
  CHECK((uniform.marginals.array() - 0.25).abs().maxCoeff() < 1e-15);
  CHECK(uniform.log_z == doctest::Approx(std::log(64.0)));

  Rng rng(5);
  const auto ising = dgs::testing::random_ising(4, rng);
  const auto exact = exact_distribution(ising);
  CHECK(exact.probs.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((exact.upper_pair.diagonal() - exact.upper).norm() < 1e-14);
  for (auto kind : {SamplerKind::GWG, SamplerKind::MHUniform, SamplerKind::NCG, SamplerKind::Gibbs}) {
    SamplerConfig c;
    c.kind = kind;
    c.eps = 0.5;
    c.radius = 2;
    const Matrix p = transition_matrix(ising, c);
    CHECK(row_sum_error(p) < 1e-12);
    CHECK(stationarity_error(p, exact.probs) < 1e-12);
  }
  SamplerConfig avg;
  avg.kind = SamplerKind::AVG;
  CHECK_THROWS_AS(transition_matrix(ising, avg), ParameterError);
  CHECK_THROWS_AS(exact_distribution(dgs::testing::random_ising(30, rng)), CapacityError);
}

TEST_CASE("mixture exact sampling matches enumeration") {
  const OrdinalPolyMixture t(2, PolyFamily::FourthOrder, 50, make_ordinal_grid(5, -1.5, 3.0));
  const auto exact = exact_distribution(t);
  CHECK((t.exact_marginals() - exact.marginals).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((t.exact_covariance() - exact.covariance).cwiseAbs().maxCoeff() < 1e-12);

  Rng rng(6);
  const std::size_t n = 200000;
  const Matrix draws = t.sample_exact(n, rng);
  Vector freq = Vector::Zero(exact.probs.size());
  for (Eigen::Index r = 0; r < draws.rows(); ++r) freq[state_index(t.space(), draws.row(r).transpose())] += 1.0;
  freq /= static_cast<double>(n);
  CHECK(0.5 * (freq - exact.probs).cwiseAbs().sum() < 0.012);
}

TEST_CASE("metrics reach their floor on exact draws") {
  const OrdinalPolyMixture t(20, PolyFamily::SecondOrder);
  Rng rng(7);
  const Matrix draws = t.sample_exact(100000, rng);
  ChainStatistics stats(t.space(), 20, true, false);
  for (Eigen::Index r = 0; r < draws.rows(); ++r) stats.add(draws.row(r).transpose());
  CHECK(marginal_kl(stats.marginals(), t.exact_marginals(), stats.count()) < 5e-3);
  const double cov_err = covariance_error(stats.covariance(), t.exact_covariance());
  CHECK(cov_err < 0.1 * t.exact_covariance().norm());
}

TEST_CASE("step-size tuning") {
  const OrdinalPolyMixture t(20, PolyFamily::SecondOrder);
  SamplerConfig base;
  base.kind = SamplerKind::NCG;
  TuneOptions opt;
  opt.n_steps = 100;
  opt.n_chains = 5;

  const auto single = evaluate_step_sizes(t, base, {0.3}, opt);
  CHECK(single.best == 0.3);
  CHECK(single.values.size() == 1);

  const auto a = evaluate_step_sizes(t, base, {0.01, 0.05, 0.5}, opt);
  const auto b = evaluate_step_sizes(t, base, {0.01, 0.05, 0.5}, opt);
  CHECK(a.mean_jumps == b.mean_jumps);
  CHECK(a.best == b.best);

  opt.n_steps = 500;
  opt.n_chains = 20;
  opt.threads = default_threads();
  const auto tuned = tune_step_size(t, base, opt);
  CHECK(tuned.best >= 0.04 - 1e-12);
  CHECK(tuned.best <= 0.06 + 1e-12);

  SamplerConfig local;
  local.kind = SamplerKind::OrdinalGWG;
  opt.n_steps = 100;
  opt.n_chains = 5;
  const auto radius = tune_step_size(t, local, opt);
  CHECK(radius.best >= 1.0);
  CHECK(radius.best == std::round(radius.best));
}

TEST_CASE("summaries and reports") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.median == 2.5);
  CHECK(s.q25 == doctest::Approx(1.75));
  CHECK(s.q75 == doctest::Approx(3.25));
  CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(s.hi - s.lo == doctest::Approx(2 * 1.96 * s.se));

  MetricReport r;
  r.experiment = "ordinal";
  r.sampler = "ncg";
  r.steps = 10;
  r.marginal_error = s;
  r.covariance_error = s;
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j.at("sampler") == "ncg");
  CHECK(j.at("marginal_error").at("mean") == 2.5);
  CHECK(j.contains("covariance_error"));
  CHECK_FALSE(j.contains("pairwise_error"));

  const auto header = metric_csv_header();
  const auto row = metric_csv_row(r);
  CHECK(static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')) + 1 == header.size());
}
