#include "dgs/targets.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace dgs {
namespace {

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

bool is_symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double log_det_spd(const Matrix& m, bool& ok) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    ok = false;
    return 0.0;
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

void Target::check_dim(const Vector& s) const {
  if (static_cast<std::size_t>(s.size()) != dim()) {
    std::ostringstream msg;
    msg << "state has length " << s.size() << ", target expects " << dim();
    throw DimensionError(msg.str());
  }
}

void Target::site_log_f(const Vector& s, std::size_t site, std::span<double> out) const {
  check_dim(s);
  Vector work = s;
  for (std::size_t o = 0; o < space().support_size(); ++o) {
    space().set_option(work, site, o);
    out[o] = log_f(work);
  }
}

// ---------------------------------------------------------------------------

QuadraticTarget::QuadraticTarget(StateSpace space, Vector bias, Matrix coupling)
    : space_(std::move(space)), bias_(std::move(bias)), coupling_(std::move(coupling)) {
  if (coupling_.rows() != bias_.size() || coupling_.cols() != bias_.size())
    throw DimensionError("coupling must be n x n with n = bias length");
  (void)space_.site_count(static_cast<std::size_t>(bias_.size()));
  const double scale = std::max(1.0, coupling_.cwiseAbs().maxCoeff());
  if (!is_symmetric(coupling_, 1e-12 * scale)) throw ParameterError("coupling must be symmetric");
}

double QuadraticTarget::log_f(const Vector& s) const {
  check_dim(s);
  return bias_.dot(s) + 0.5 * s.dot(coupling_ * s);
}

Vector QuadraticTarget::grad_f(const Vector& s) const {
  check_dim(s);
  return bias_ + coupling_ * s;
}

Evaluation QuadraticTarget::evaluate(const Vector& s) const {
  check_dim(s);
  Vector js = coupling_ * s;
  const double f = bias_.dot(s) + 0.5 * s.dot(js);
  return {f, bias_ + js};
}

void QuadraticTarget::site_log_f(const Vector& s, std::size_t site, std::span<double> out) const {
  check_dim(s);
  const auto k = space_.support_size();
  if (!space_.is_categorical()) {
    const auto i = static_cast<Eigen::Index>(site);
    const double h = bias_[i] + coupling_.row(i).dot(s);
    const double v0 = s[i];
    for (std::size_t o = 0; o < k; ++o) {
      const double delta = space_.option_value(o) - v0;
      out[o] = delta * h + 0.5 * delta * delta * coupling_(i, i);
    }
    return;
  }
  const auto base = static_cast<Eigen::Index>(site * k);
  const auto current = space_.option_at(s, site);
  const auto c = base + static_cast<Eigen::Index>(current);
  const double hc = bias_[c] + coupling_.row(c).dot(s);
  for (std::size_t o = 0; o < k; ++o) {
    if (o == current) {
      out[o] = 0.0;
      continue;
    }
    const auto e = base + static_cast<Eigen::Index>(o);
    const double he = bias_[e] + coupling_.row(e).dot(s);
    out[o] = he - hc + 0.5 * (coupling_(e, e) + coupling_(c, c) - 2.0 * coupling_(e, c));
  }
}

IsingModel::IsingModel(Vector bias, Matrix coupling)
    : QuadraticTarget(StateSpace::binary_pm1(), std::move(bias), std::move(coupling)) {
  if (this->coupling().diagonal().cwiseAbs().maxCoeff() != 0.0)
    throw ParameterError("Ising coupling must have a zero diagonal");
}

double ising_log_f(const IsingModel& m, const Vector& s) { return m.log_f(s); }

Vector ising_grad_f(const IsingModel& m, const Vector& s) { return m.grad_f(s); }

Matrix lattice_coupling(std::size_t rows, std::size_t cols, double theta, bool circular) {
  if (rows == 0 || cols == 0) throw ParameterError("lattice needs rows * cols > 0");
  const auto n = static_cast<Eigen::Index>(rows * cols);
  Matrix j = Matrix::Zero(n, n);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = theta;
    j(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = theta;
  };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto node = r * cols + c;
      if (c + 1 < cols || circular) link(node, r * cols + (c + 1) % cols);
      if (r + 1 < rows || circular) link(node, ((r + 1) % rows) * cols + c);
    }
  }
  return j;
}

IsingModel make_lattice_ising(std::size_t rows, std::size_t cols, double theta, bool circular) {
  Matrix j = lattice_coupling(rows, cols, theta, circular);
  Vector b = Vector::Zero(j.rows());
  return IsingModel(std::move(b), std::move(j));
}

// ---------------------------------------------------------------------------

OrdinalPolyMixture::OrdinalPolyMixture(std::size_t dim, PolyFamily family, std::size_t components,
                                       StateSpace grid)
    : dim_(dim), family_(family), components_(components), space_(std::move(grid)) {
  if (dim == 0) throw ParameterError("mixture needs dim >= 1");
  if (components == 0) throw ParameterError("mixture needs at least one component");
  if (space_.kind() != SpaceKind::Ordinal) throw ParameterError("mixture targets need an ordinal grid");
  const auto k = space_.support_size();
  const auto nc = static_cast<Eigen::Index>(components);
  table_.resize(nc, static_cast<Eigen::Index>(k));
  site_probs_.resize(nc, static_cast<Eigen::Index>(k));
  log_norm_.resize(nc);
  offsets_.resize(nc);
  for (Eigen::Index c = 0; c < nc; ++c) {
    const double kk = static_cast<double>(c + 1);
    offsets_[c] = family_ == PolyFamily::SecondOrder ? kk / 25.0 : -1.0 + 3.0 * kk / 50.0;
    for (std::size_t o = 0; o < k; ++o)
      table_(c, static_cast<Eigen::Index>(o)) =
          component_log_factor(static_cast<std::size_t>(c) + 1, space_.values()[o]);
    const Vector row = table_.row(c).transpose();
    log_norm_[c] = log_sum_exp(row);
    site_probs_.row(c) = (row.array() - log_norm_[c]).exp().transpose();
  }
}

double OrdinalPolyMixture::component_log_factor(std::size_t k, double u) const {
  const double kk = static_cast<double>(k);
  if (family_ == PolyFamily::SecondOrder) {
    const double t = u + kk / 25.0;
    return 1.5 - 2.0 * t - 6.0 * t * t;
  }
  const double t = 2.0 * u - 1.0 + 3.0 * kk / 50.0;
  const double t2 = t * t;
  return -t + t2 - t2 * t - t2 * t2;
}

double OrdinalPolyMixture::component_log_factor_derivative(std::size_t k, double u) const {
  const double kk = static_cast<double>(k);
  if (family_ == PolyFamily::SecondOrder) {
    const double t = u + kk / 25.0;
    return -2.0 - 12.0 * t;
  }
  const double t = 2.0 * u - 1.0 + 3.0 * kk / 50.0;
  return 2.0 * (-1.0 + 2.0 * t - 3.0 * t * t - 4.0 * t * t * t);
}

Eigen::ArrayXd OrdinalPolyMixture::factors(double u) const {
  if (family_ == PolyFamily::SecondOrder) {
    const Eigen::ArrayXd t = u + offsets_;
    return 1.5 - 2.0 * t - 6.0 * t.square();
  }
  const Eigen::ArrayXd t = 2.0 * u + offsets_;
  const Eigen::ArrayXd t2 = t.square();
  return -t + t2 - t2 * t - t2.square();
}

Eigen::ArrayXd OrdinalPolyMixture::factor_derivatives(double u) const {
  if (family_ == PolyFamily::SecondOrder) return -2.0 - 12.0 * (u + offsets_);
  const Eigen::ArrayXd t = 2.0 * u + offsets_;
  return 2.0 * (-1.0 + 2.0 * t - 3.0 * t.square() - 4.0 * t.cube());
}

double OrdinalPolyMixture::log_f(const Vector& s) const {
  check_dim(s);
  Eigen::ArrayXd sums = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(components_));
  for (Eigen::Index i = 0; i < s.size(); ++i) sums += factors(s[i]);
  return log_sum_exp(sums.matrix());
}

Vector OrdinalPolyMixture::grad_f(const Vector& s) const { return evaluate(s).grad; }

Evaluation OrdinalPolyMixture::evaluate(const Vector& s) const {
  check_dim(s);
  Eigen::ArrayXd sums = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(components_));
  for (Eigen::Index i = 0; i < s.size(); ++i) sums += factors(s[i]);
  const double mx = sums.maxCoeff();
  const Eigen::ArrayXd w = (sums - mx).exp();
  const double total = w.sum();
  Vector grad(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) grad[i] = (w * factor_derivatives(s[i])).sum() / total;
  return {mx + std::log(total), std::move(grad)};
}

void OrdinalPolyMixture::site_log_f(const Vector& s, std::size_t site, std::span<double> out) const {
  check_dim(s);
  Eigen::ArrayXd rest = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(components_));
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (j != static_cast<Eigen::Index>(site)) rest += factors(s[j]);
  const Eigen::ArrayXXd joint = table_.array().colwise() + rest;
  const Eigen::RowVectorXd mx = joint.colwise().maxCoeff();
  const Eigen::RowVectorXd sums = (joint.rowwise() - mx.array()).exp().colwise().sum();
  for (std::size_t o = 0; o < space_.support_size(); ++o) {
    const auto c = static_cast<Eigen::Index>(o);
    out[o] = mx[c] + std::log(sums[c]);
  }
}

Vector OrdinalPolyMixture::component_weights() const {
  Vector logw = static_cast<double>(dim_) * log_norm_;
  const double lse = log_sum_exp(logw);
  return (logw.array() - lse).exp();
}

Matrix OrdinalPolyMixture::exact_marginals() const {
  const Vector w = component_weights();
  const Eigen::RowVectorXd p = w.transpose() * site_probs_;
  Matrix out(static_cast<Eigen::Index>(dim_), p.size());
  out.rowwise() = p;
  return out;
}

Matrix OrdinalPolyMixture::exact_covariance() const {
  const Vector w = component_weights();
  Eigen::Map<const Vector> vals(space_.values().data(), static_cast<Eigen::Index>(space_.support_size()));
  const Vector m1 = site_probs_ * vals;
  const Vector m2 = site_probs_ * vals.cwiseProduct(vals);
  const double mean = w.dot(m1);
  const double cross = w.dot(m1.cwiseProduct(m1)) - mean * mean;
  const double var = w.dot(m2) - mean * mean;
  const auto d = static_cast<Eigen::Index>(dim_);
  Matrix cov = Matrix::Constant(d, d, cross);
  cov.diagonal().setConstant(var);
  return cov;
}

Matrix OrdinalPolyMixture::sample_exact(std::size_t n, Rng& rng) const {
  const Vector w = component_weights();
  const auto k = static_cast<Eigen::Index>(space_.support_size());
  auto draw = [&](auto&& prob, Eigen::Index size) {
    double u = rng.uniform();
    for (Eigen::Index j = 0; j < size - 1; ++j) {
      u -= prob(j);
      if (u < 0.0) return j;
    }
    return size - 1;
  };
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim_));
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const auto c = draw([&](Eigen::Index j) { return w[j]; }, w.size());
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
      const auto o = draw([&](Eigen::Index j) { return site_probs_(c, j); }, k);
      out(r, i) = space_.values()[static_cast<std::size_t>(o)];
    }
  }
  return out;
}

double ordinal_mixture_log_f(const OrdinalPolyMixture& t, const Vector& s) { return t.log_f(s); }

Vector ordinal_mixture_grad_f(const OrdinalPolyMixture& t, const Vector& s) { return t.grad_f(s); }

// ---------------------------------------------------------------------------

SparseRegressionPosterior::SparseRegressionPosterior(Matrix x, Vector y, RegressionHyper hyper,
                                                     std::size_t padding, double rho_pad)
    : x_(std::move(x)),
      y_(std::move(y)),
      hyper_(hyper),
      padding_(padding),
      rho_pad_(rho_pad),
      space_(StateSpace::binary01()) {
  if (x_.rows() != y_.size()) throw DimensionError("design rows must match response length");
  if (x_.cols() == 0) throw ParameterError("regression needs at least one covariate");
  if (padding_ > 0 && !(rho_pad_ > 0.0 && rho_pad_ < 1.0))
    throw ParameterError("padding rate must lie in (0, 1)");
  if (!(hyper_.lambda > 0.0) || !(hyper_.g > 0.0) || !(hyper_.alpha_pi > 0.0) || !(hyper_.beta_pi > 0.0) ||
      !(hyper_.alpha_sigma > 0.0) || !(hyper_.beta_sigma > 0.0))
    throw ParameterError("regression hyperparameters must be positive");
  gram_ = x_.transpose() * x_;
  xty_ = x_.transpose() * y_;
  yty_ = y_.squaredNorm();
}

double SparseRegressionPosterior::log_f(const Vector& s) const {
  check_dim(s);
  const auto d = static_cast<Eigen::Index>(covariates());
  const auto n = static_cast<double>(y_.size());
  const Vector sd = s.head(d);
  const double total = sd.sum();
  double value = std::lgamma(total + hyper_.alpha_pi) +
                 std::lgamma(static_cast<double>(d) - total + hyper_.beta_pi);

  const Matrix m = sd.asDiagonal() * gram_ * sd.asDiagonal();
  const Matrix eye = Matrix::Identity(d, d);
  const Matrix a = m + hyper_.lambda * eye;
  const Matrix b = (1.0 + hyper_.g) * m + hyper_.lambda * eye;
  bool ok = true;
  const double logdet_a = log_det_spd(a, ok);
  Eigen::LLT<Matrix> llt_b(b);
  if (!ok || llt_b.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const double logdet_b = 2.0 * llt_b.matrixLLT().diagonal().array().log().sum();
  const Vector c = sd.cwiseProduct(xty_);
  const double q = 2.0 * hyper_.beta_sigma + yty_ - hyper_.g * c.dot(llt_b.solve(c));
  if (!(q > 0.0)) return -std::numeric_limits<double>::infinity();
  value += hyper_.det_power * (logdet_a - logdet_b) - 0.5 * (2.0 * hyper_.alpha_sigma + n) * std::log(q);

  if (padding_ > 0) {
    const double lr = std::log(rho_pad_);
    const double lq = std::log1p(-rho_pad_);
    const Vector sp = s.tail(static_cast<Eigen::Index>(padding_));
    value += (sp.array() * lr + (1.0 - sp.array()) * lq).sum();
  }
  return value;
}

Vector SparseRegressionPosterior::grad_f(const Vector& s) const { return evaluate(s).grad; }

Evaluation SparseRegressionPosterior::evaluate(const Vector& s) const {
  check_dim(s);
  const auto d = static_cast<Eigen::Index>(covariates());
  const auto n = static_cast<double>(y_.size());
  const double g = hyper_.g;
  const double shape = 0.5 * (2.0 * hyper_.alpha_sigma + n);
  const Vector sd = s.head(d);
  const double total = sd.sum();
  const double rest = static_cast<double>(d) - total;

  Evaluation out;
  out.grad = Vector::Zero(s.size());
  double value = std::lgamma(total + hyper_.alpha_pi) + std::lgamma(rest + hyper_.beta_pi);
  const double dprior =
      boost::math::digamma(total + hyper_.alpha_pi) - boost::math::digamma(rest + hyper_.beta_pi);

  const Matrix m = sd.asDiagonal() * gram_ * sd.asDiagonal();
  const Matrix eye = Matrix::Identity(d, d);
  Eigen::LLT<Matrix> llt_a(m + hyper_.lambda * eye);
  Eigen::LLT<Matrix> llt_b((1.0 + g) * m + hyper_.lambda * eye);
  if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success) {
    out.log_f = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double logdet_a = 2.0 * llt_a.matrixLLT().diagonal().array().log().sum();
  const double logdet_b = 2.0 * llt_b.matrixLLT().diagonal().array().log().sum();
  const Matrix a_inv = llt_a.solve(eye);
  const Matrix b_inv = llt_b.solve(eye);
  const Vector c = sd.cwiseProduct(xty_);
  const Vector u = b_inv * c;
  const double q = 2.0 * hyper_.beta_sigma + yty_ - g * c.dot(u);
  if (!(q > 0.0)) {
    out.log_f = -std::numeric_limits<double>::infinity();
    return out;
  }
  value += hyper_.det_power * (logdet_a - logdet_b) - shape * std::log(q);

  // d log|M(s) + lambda I| / d s_i = 2 [(A^{-1} .* G) s]_i, likewise for B with (1+g).
  const Vector dlog_a = 2.0 * a_inv.cwiseProduct(gram_) * sd;
  const Vector dlog_b = 2.0 * (1.0 + g) * b_inv.cwiseProduct(gram_) * sd;
  const Vector gsu = gram_ * sd.cwiseProduct(u);
  const Vector dq = -g * (2.0 * xty_.cwiseProduct(u) - 2.0 * (1.0 + g) * u.cwiseProduct(gsu));
  out.grad.head(d) = Vector::Constant(d, dprior) + hyper_.det_power * (dlog_a - dlog_b) - (shape / q) * dq;

  if (padding_ > 0) {
    const double lr = std::log(rho_pad_);
    const double lq = std::log1p(-rho_pad_);
    const auto p = static_cast<Eigen::Index>(padding_);
    const Vector sp = s.tail(p);
    value += (sp.array() * lr + (1.0 - sp.array()) * lq).sum();
    out.grad.tail(p).setConstant(lr - lq);
  }
  out.log_f = value;
  return out;
}

double SparseRegressionPosterior::block_log_f(const std::vector<bool>& mask) const {
  const auto d = covariates();
  if (mask.size() != d) throw DimensionError("mask length must equal the number of covariates");
  std::vector<Eigen::Index> active;
  for (std::size_t i = 0; i < d; ++i)
    if (mask[i]) active.push_back(static_cast<Eigen::Index>(i));
  const auto m = static_cast<Eigen::Index>(active.size());
  const double n = static_cast<double>(y_.size());
  double value = std::lgamma(static_cast<double>(m) + hyper_.alpha_pi) +
                 std::lgamma(static_cast<double>(d) - static_cast<double>(m) + hyper_.beta_pi);
  double q = 2.0 * hyper_.beta_sigma + yty_;
  if (m > 0) {
    Matrix ga(m, m);
    Vector ra(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      ra[i] = xty_[active[static_cast<std::size_t>(i)]];
      for (Eigen::Index j = 0; j < m; ++j)
        ga(i, j) = gram_(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
    }
    const Matrix eye = Matrix::Identity(m, m);
    Eigen::LLT<Matrix> llt_a(ga + hyper_.lambda * eye);
    Eigen::LLT<Matrix> llt_b((1.0 + hyper_.g) * ga + hyper_.lambda * eye);
    if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success)
      return -std::numeric_limits<double>::infinity();
    const double logdet_a = 2.0 * llt_a.matrixLLT().diagonal().array().log().sum();
    const double logdet_b = 2.0 * llt_b.matrixLLT().diagonal().array().log().sum();
    value += hyper_.det_power * (logdet_a - logdet_b);
    q -= hyper_.g * ra.dot(llt_b.solve(ra));
  }
  if (!(q > 0.0)) return -std::numeric_limits<double>::infinity();
  return value - 0.5 * (2.0 * hyper_.alpha_sigma + n) * std::log(q);
}

SparseRegressionPosterior::BlockMoments SparseRegressionPosterior::exact_block_moments(
    std::size_t cap) const {
  const auto d = covariates();
  if (d >= 63 || (std::size_t{1} << d) > cap) {
    std::ostringstream msg;
    msg << "refusing to enumerate 2^" << d << " selection masks above cap " << cap;
    throw CapacityError(msg.str());
  }
  const std::size_t total = std::size_t{1} << d;
  std::vector<double> logp(total);
  std::vector<bool> mask(d);
  for (std::size_t code = 0; code < total; ++code) {
    // bit (d-1-i) holds s_i so codes follow lexicographic state order
    for (std::size_t i = 0; i < d; ++i) mask[i] = (code >> (d - 1 - i)) & 1U;
    logp[code] = block_log_f(mask);
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  const auto dd = static_cast<Eigen::Index>(d);
  BlockMoments out;
  out.p1 = Vector::Zero(dd);
  out.p11 = Matrix::Zero(dd, dd);
  std::vector<Eigen::Index> active;
  for (std::size_t code = 0; code < total; ++code) {
    const double w = std::exp(logp[code] - mx);
    z += w;
    active.clear();
    for (std::size_t i = 0; i < d; ++i)
      if ((code >> (d - 1 - i)) & 1U) active.push_back(static_cast<Eigen::Index>(i));
    for (auto i : active) {
      out.p1[i] += w;
      for (auto j : active) out.p11(i, j) += w;
    }
  }
  out.p1 /= z;
  out.p11 /= z;
  out.log_z = mx + std::log(z);
  return out;
}

std::pair<Vector, Matrix> SparseRegressionPosterior::exact_moments(std::size_t cap) const {
  const auto block = exact_block_moments(cap);
  const auto d = static_cast<Eigen::Index>(covariates());
  const auto total = static_cast<Eigen::Index>(dim());
  Vector p1(total);
  p1.head(d) = block.p1;
  p1.tail(total - d).setConstant(rho_pad_);
  Matrix p11 = p1 * p1.transpose();
  p11.topLeftCorner(d, d) = block.p11;
  p11.diagonal() = p1;
  return {std::move(p1), std::move(p11)};
}

RegressionData make_regression_dataset(Rng& rng, std::size_t n, std::size_t base, std::size_t columns) {
  if (base == 0 || columns < base || n == 0) throw ParameterError("invalid regression dataset shape");
  RegressionData data{Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns)),
                      Vector::Zero(static_cast<Eigen::Index>(n))};
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    for (std::size_t c = 0; c < base; ++c) {
      const double v = static_cast<double>(rng.uniform_index(3));
      data.x(r, static_cast<Eigen::Index>(c)) = v;
      data.y[r] += v;
    }
    // 1-based x_j := x_{(j mod base) + 1}  <=>  0-based column c copies (c + 1) mod base
    for (std::size_t c = base; c < columns; ++c)
      data.x(r, static_cast<Eigen::Index>(c)) = data.x(r, static_cast<Eigen::Index>((c + 1) % base));
  }
  return data;
}

void write_regression_csv(std::ostream& out, const RegressionData& data) {
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << "x_" << j << ',';
  out << "y\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << data.x(i, j) << ',';
    out << data.y[i] << '\n';
  }
}

}  // namespace dgs
