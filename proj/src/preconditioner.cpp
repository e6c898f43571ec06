#include "dgs/preconditioner.hpp"

#include "dgs/io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace dgs {
namespace {

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("step size eps must be positive and finite");
}

}  // namespace

PreconditionerState::PreconditionerState(std::size_t dim, double eps)
    : PreconditionerState(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)), 1.0,
                          eps) {}

PreconditionerState::PreconditionerState(Matrix sigma, double gamma, double eps)
    : gamma_(gamma), gamma_old_(gamma), eps_(eps) {
  check_eps(eps);
  set_sigma(std::move(sigma));
  refresh_sqrt();
}

void PreconditionerState::set_sigma(Matrix sigma) {
  if (sigma.rows() != sigma.cols()) throw DimensionError("preconditioner must be square");
  if (!sigma.allFinite()) throw ParameterError("preconditioner must be finite");
  sigma_ = 0.5 * (sigma + sigma.transpose());
  fresh_ = false;
}

void PreconditionerState::set_gamma(double gamma, double gamma_old) {
  if (!std::isfinite(gamma) || !std::isfinite(gamma_old)) throw ParameterError("gamma must be finite");
  gamma_ = gamma;
  gamma_old_ = gamma_old;
  fresh_ = false;
}

void PreconditionerState::set_eps(double eps) {
  check_eps(eps);
  eps_ = eps;
  fresh_ = false;
}

void PreconditionerState::refresh_sqrt() {
  const auto n = sigma_.rows();
  scaled_ = gamma_ * sigma_;
  if (scaled_.isZero(0.0)) {
    // exact path: keeps PAVG with Sigma = 0 bit-identical to AVG
    eigenvalues_ = Vector::Zero(n);
    eigenvectors_ = Matrix::Identity(n, n);
    d_eps_ = 2.0 / eps_;
    sqrt_shifted_ = std::sqrt(d_eps_) * Matrix::Identity(n, n);
    isotropic_ = true;
    fresh_ = true;
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled_);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition of the preconditioner failed");
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  isotropic_ = false;
  d_eps_ = std::max(0.0, -eigenvalues_.minCoeff()) + 2.0 / eps_;
  const Vector roots = (eigenvalues_.array() + d_eps_).max(0.0).sqrt();
  const Matrix root = eigenvectors_ * roots.asDiagonal() * eigenvectors_.transpose();
  sqrt_shifted_ = 0.5 * (root + root.transpose());
  fresh_ = true;
}

void PreconditionerState::require_fresh() const {
  if (!fresh_) throw StaleCacheError("preconditioner changed since the last refresh_sqrt()");
}

const Matrix& PreconditionerState::scaled() const {
  require_fresh();
  return scaled_;
}

const Vector& PreconditionerState::eigenvalues() const {
  require_fresh();
  return eigenvalues_;
}

const Matrix& PreconditionerState::eigenvectors() const {
  require_fresh();
  return eigenvectors_;
}

double PreconditionerState::lambda_min() const {
  require_fresh();
  return eigenvalues_.size() ? eigenvalues_.minCoeff() : 0.0;
}

double PreconditionerState::d_eps() const {
  require_fresh();
  return d_eps_;
}

bool PreconditionerState::isotropic() const {
  require_fresh();
  return isotropic_;
}

const Matrix& PreconditionerState::sqrt_shifted() const {
  require_fresh();
  return sqrt_shifted_;
}

PreconditionerState refresh_sqrt(PreconditionerState state) {
  state.refresh_sqrt();
  return state;
}

void save_preconditioner(const PreconditionerState& state, const std::string& stem) {
  io::write_npy(stem + ".npy", state.sigma());
  nlohmann::json meta{{"dim", state.dim()},       {"gamma", state.gamma()}, {"gamma_old", state.gamma_old()},
                      {"eps", state.eps()},       {"delta", state.delta},   {"rho", state.rho},
                      {"sigma_file", stem + ".npy"}};
  if (state.fresh()) meta["d_eps"] = state.d_eps();
  std::ofstream out(stem + ".json");
  if (!out) throw std::runtime_error("cannot open " + stem + ".json for writing");
  out << meta.dump(2) << '\n';
}

PreconditionerState load_preconditioner(const std::string& stem) {
  std::ifstream in(stem + ".json");
  if (!in) throw std::runtime_error("cannot open " + stem + ".json");
  const auto meta = nlohmann::json::parse(in);
  Matrix sigma = io::read_npy(stem + ".npy");
  PreconditionerState state(std::move(sigma), meta.at("gamma").get<double>(), meta.at("eps").get<double>());
  state.set_gamma(meta.at("gamma").get<double>(), meta.value("gamma_old", meta.at("gamma").get<double>()));
  state.delta = meta.value("delta", 0.25);
  state.rho = meta.value("rho", 0.99);
  state.refresh_sqrt();
  return state;
}

}  // namespace dgs
