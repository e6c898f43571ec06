#pragma once

#include "dgs/types.hpp"

#include <cstddef>
#include <string>

namespace dgs {

/// Global preconditioner gamma * Sigma for PAVG together with the cached
/// quantities the proposal needs:
///
///   d_eps           = max(0, -lambda_min(gamma Sigma)) + 2 / eps
///   Sigma_eps^{1/2} = V diag(sqrt(lambda_i + d_eps)) V'   (symmetric root)
///
/// where (lambda, V) is the eigendecomposition of gamma * Sigma. Any change
/// to Sigma, gamma or eps marks the cache stale until refresh_sqrt().
class PreconditionerState {
 public:
  /// Sigma = 0, gamma = gamma_old = 1.
  PreconditionerState(std::size_t dim, double eps);
  PreconditionerState(Matrix sigma, double gamma, double eps);

  std::size_t dim() const { return static_cast<std::size_t>(sigma_.rows()); }
  const Matrix& sigma() const { return sigma_; }
  double gamma() const { return gamma_; }
  double gamma_old() const { return gamma_old_; }
  double eps() const { return eps_; }

  /// Adaptation rate and its decay factor (defaults 0.25 and 0.99).
  double delta = 0.25;
  double rho = 0.99;

  void set_sigma(Matrix sigma);
  void set_gamma(double gamma, double gamma_old);
  void set_eps(double eps);

  /// Recomputes the eigendecomposition, d_eps and the shifted square root.
  void refresh_sqrt();
  bool fresh() const { return fresh_; }

  /// Cached quantities; throw StaleCacheError if not fresh.
  const Matrix& scaled() const;
  const Vector& eigenvalues() const;
  const Matrix& eigenvectors() const;
  double lambda_min() const;
  double d_eps() const;
  const Matrix& sqrt_shifted() const;
  /// True when gamma * Sigma is exactly zero, so the root is sqrt(2/eps) I.
  bool isotropic() const;

 private:
  void require_fresh() const;

  Matrix sigma_;
  double gamma_ = 1.0;
  double gamma_old_ = 1.0;
  double eps_;
  bool fresh_ = false;

  Matrix scaled_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  double d_eps_ = 0.0;
  bool isotropic_ = false;
  Matrix sqrt_shifted_;
};

PreconditionerState refresh_sqrt(PreconditionerState state);

/// Writes `<stem>.npy` (Sigma, float64, C order) and `<stem>.json`
/// (gamma, gamma_old, eps, d_eps, delta, rho, dim).
void save_preconditioner(const PreconditionerState& state, const std::string& stem);
PreconditionerState load_preconditioner(const std::string& stem);

}  // namespace dgs
