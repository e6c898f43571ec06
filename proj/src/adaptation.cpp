#include "dgs/adaptation.hpp"

#include "dgs/parallel.hpp"
#include "dgs/samplers.hpp"

#include <cmath>
#include <limits>

namespace dgs {

AdaptationHistory::AdaptationHistory(std::size_t dim)
    : dim_(dim),
      sum_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      outer_(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

void AdaptationHistory::add_state(const Vector& s) {
  if (static_cast<std::size_t>(s.size()) != dim_) throw DimensionError("history state has the wrong length");
  if (n_states_ == 0) shift_ = s;
  const Vector c = s - shift_;
  sum_ += c;
  outer_.selfadjointView<Eigen::Lower>().rankUpdate(c);
  ++n_states_;
}

void AdaptationHistory::add_pair(const Vector& s, double log_f, const Vector& grad, const Vector& next,
                                 double next_log_f) {
  TransitionPair pair;
  double linear = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double d = next[i] - s[i];
    if (d != 0.0) {
      pair.delta.emplace_back(i, d);
      linear += grad[i] * d;
    }
  }
  if (pair.delta.empty()) return;
  pair.y = next_log_f - log_f - linear;
  if (std::isfinite(pair.y)) pairs_.push_back(std::move(pair));
}

void AdaptationHistory::append(const ChainEnsemble& ensemble) {
  const auto n = static_cast<Eigen::Index>(ensemble.size());
  const bool have_prev = last_states_.rows() == n;
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& chain = ensemble[static_cast<std::size_t>(c)];
    add_state(chain.state);
    if (have_prev)
      add_pair(last_states_.row(c).transpose(), last_log_f_[c], last_grads_.row(c).transpose(), chain.state,
               chain.log_f);
  }
  last_states_ = ensemble.states();
  last_log_f_ = ensemble.log_f();
  last_grads_ = ensemble.grads();
}

Matrix AdaptationHistory::covariance() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  if (n_states_ < 2) return Matrix::Zero(d, d);
  const double n = static_cast<double>(n_states_);
  Matrix full = outer_.selfadjointView<Eigen::Lower>();
  Matrix cov = (full - sum_ * sum_.transpose() / n) / (n - 1.0);
  return 0.5 * (cov + cov.transpose());
}

double AdaptationHistory::window_mean(std::size_t window, std::size_t back) const {
  if (window == 0 || jumps_.size() < (back + 1) * window) throw ParameterError("jump log shorter than requested window");
  const auto end = jumps_.size() - back * window;
  double total = 0.0;
  for (auto i = end - window; i < end; ++i) total += jumps_[i];
  return total / static_cast<double>(window);
}

std::optional<Matrix> pseudo_inverse(const Matrix& m, double rel_threshold) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Vector& lambda = eig.eigenvalues();
  const double top = lambda.size() ? lambda.maxCoeff() : 0.0;
  if (!(top > 0.0)) return std::nullopt;
  Vector inv(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) inv[i] = lambda[i] > rel_threshold * top ? 1.0 / lambda[i] : 0.0;
  Matrix out = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return Matrix(0.5 * (out + out.transpose()));
}

namespace {

std::vector<SigmaCandidate> candidates_from_covariance(Matrix cov) {
  std::vector<SigmaCandidate> out;
  auto precision = pseudo_inverse(cov);
  out.push_back({"covariance", std::move(cov)});
  if (precision) out.push_back({"precision", std::move(*precision)});
  return out;
}

}  // namespace

std::vector<SigmaCandidate> history_candidates(const AdaptationHistory& history) {
  return candidates_from_covariance(history.covariance());
}

Matrix sample_covariance(const Matrix& data) {
  if (data.rows() < 2) return Matrix::Zero(data.cols(), data.cols());
  const Eigen::RowVectorXd mean = data.colwise().mean();
  Matrix centered = data.rowwise() - mean;
  // a constant column has exactly zero variance, whatever the rounding in its mean
  for (Eigen::Index c = 0; c < data.cols(); ++c)
    if (data.col(c).minCoeff() == data.col(c).maxCoeff()) centered.col(c).setZero();
  Matrix cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

std::vector<SigmaCandidate> ebm_sigma_from_data(const Matrix& data) {
  return candidates_from_covariance(sample_covariance(data));
}

SigmaFit fit_sigma(const std::vector<TransitionPair>& pairs, const std::vector<SigmaCandidate>& candidates) {
  if (pairs.size() < 2) throw DegenerateFitError("fewer than two adjacent pairs with a move; cannot fit gamma0");
  if (candidates.empty()) throw ParameterError("no preconditioner candidates");
  SigmaFit fit;
  double best_residual = std::numeric_limits<double>::infinity();
  std::vector<double> xs(pairs.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Matrix& sigma = candidates[c].sigma;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      double q = 0.0;
      for (const auto& [i, di] : pairs[t].delta)
        for (const auto& [j, dj] : pairs[t].delta) q += di * sigma(i, j) * dj;
      xs[t] = 0.5 * q;
      sxy += xs[t] * pairs[t].y;
      sxx += xs[t] * xs[t];
    }
    if (!(sxx > 0.0)) {
      fit.gammas.push_back(std::numeric_limits<double>::quiet_NaN());
      fit.residuals.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double gamma0 = sxy / sxx;
    double residual = 0.0;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      const double r = pairs[t].y - gamma0 * xs[t];
      residual += r * r;
    }
    fit.gammas.push_back(gamma0);
    fit.residuals.push_back(residual);
    if (residual < best_residual) {
      best_residual = residual;
      fit.best = c;
    }
  }
  if (!std::isfinite(best_residual)) throw DegenerateFitError("every candidate has x = 0 on all pairs");
  fit.name = candidates[fit.best].name;
  fit.sigma = candidates[fit.best].sigma;
  fit.gamma0 = fit.gammas[fit.best];
  fit.residual = fit.residuals[fit.best];
  return fit;
}

SigmaFit fit_sigma(const AdaptationHistory& history, const std::vector<SigmaCandidate>& candidates) {
  return fit_sigma(history.transitions(), candidates);
}

SigmaFit fit_sigma(const AdaptationHistory& history) { return fit_sigma(history, history_candidates(history)); }

GammaUpdate adapt_gamma(double gamma, double gamma_old, double delta, double jump_new, double jump_old) {
  const bool increased = gamma >= gamma_old;
  const bool improved = jump_new >= jump_old;
  const double adjust = increased == improved ? delta : -delta;
  const double next = std::abs(gamma) >= 1.0 ? gamma * (1.0 + adjust) : gamma + adjust;
  return {next, gamma};
}

// ---------------------------------------------------------------------------

AdaptivePavg::AdaptivePavg(const Target& target, AdaptiveConfig config)
    : target_(&target),
      config_(config),
      pre_(std::make_shared<PreconditionerState>(target.dim(), config.history_eps.value_or(config.eps))),
      history_(target.dim()) {
  if (config_.n_adapt == 0) throw ParameterError("n_adapt must be positive");
  if (!(config_.delta >= 0.0) || !(config_.rho > 0.0)) throw ParameterError("invalid adaptation rate or decay");
  pre_->delta = config_.delta;
  pre_->rho = config_.rho;
}

double AdaptivePavg::iterate(ChainEnsemble& ensemble) {
  if (t_ == 0 && config_.n_sigma > 0) history_.append(ensemble);
  ++t_;
  std::vector<double> jumps(ensemble.size());
  const PreconditionerState& pre = *pre_;
  parallel_for(ensemble.size(), config_.threads,
               [&](std::size_t c) { jumps[c] = pavg_step(*target_, ensemble[c], pre).l1_jump; });
  ensemble.advance(1);
  double mean = 0.0;
  for (double j : jumps) mean += j;
  mean /= static_cast<double>(std::max<std::size_t>(1, jumps.size()));
  history_.record_jump(mean);

  const auto t = t_;
  const auto n_sigma = config_.n_sigma;
  const auto n_adapt = config_.n_adapt;
  if (t < n_sigma) {
    history_.append(ensemble);
  } else if (t == n_sigma) {
    try {
      fit_ = fit_sigma(history_);
      pre_->set_sigma(fit_->sigma);
      pre_->set_gamma(fit_->gamma0, fit_->gamma0);
      pre_->set_eps(config_.eps);
      pre_->refresh_sqrt();
    } catch (const DegenerateFitError&) {
      fit_failed_ = true;
    }
  } else if (fit_ && t % n_adapt == 0 && t >= n_sigma + 2 * n_adapt) {
    const auto next = adapt_gamma(pre_->gamma(), pre_->gamma_old(), pre_->delta, history_.window_mean(n_adapt, 0),
                                  history_.window_mean(n_adapt, 1));
    pre_->set_gamma(next.gamma, next.gamma_old);
    pre_->delta *= pre_->rho;
    pre_->refresh_sqrt();
    ++adaptations_;
  }
  return mean;
}

AdaptiveResult adaptive_loop(const Target& target, const AdaptiveConfig& config, std::size_t n_iters,
                             std::uint64_t seed,
                             const std::function<void(std::size_t, const ChainEnsemble&)>& on_iteration) {
  ChainEnsemble ensemble(target, config.n_chains, seed);
  AdaptivePavg sampler(target, config);
  AdaptiveResult result;
  result.gamma_trace.reserve(n_iters);
  result.jump_trace.reserve(n_iters);
  for (std::size_t t = 0; t < n_iters; ++t) {
    result.jump_trace.push_back(sampler.iterate(ensemble));
    result.gamma_trace.push_back(sampler.preconditioner()->gamma());
    if (on_iteration) on_iteration(sampler.iteration(), ensemble);
  }
  result.preconditioner = sampler.preconditioner();
  result.fit = sampler.fit();
  result.final_states = ensemble.states();
  return result;
}

}  // namespace dgs
