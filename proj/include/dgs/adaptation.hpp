#pragma once

#include "dgs/chains.hpp"
#include "dgs/preconditioner.hpp"
#include "dgs/targets.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dgs {

/// One adjacent pair (s_t, s_{t+1}) that moved: the sparse displacement and
/// the Taylor remainder y = f(s_{t+1}) - f(s_t) - grad f(s_t)'(s_{t+1} - s_t).
struct TransitionPair {
  std::vector<std::pair<Eigen::Index, double>> delta;
  double y = 0.0;
};

/// Burn-in history: adjacent-pair remainders, a running covariance of every
/// collected state, and a log of per-iteration mean L1 jumps.
class AdaptationHistory {
 public:
  explicit AdaptationHistory(std::size_t dim);

  /// Adds every chain's current state; pairs are formed against the states
  /// of the previous append (same chain index).
  void append(const ChainEnsemble& ensemble);
  void add_state(const Vector& s);
  void add_pair(const Vector& s, double log_f, const Vector& grad, const Vector& next, double next_log_f);

  std::size_t dim() const { return dim_; }
  std::size_t states() const { return n_states_; }
  std::size_t pairs() const { return pairs_.size(); }
  const std::vector<TransitionPair>& transitions() const { return pairs_; }
  /// Sample covariance (n - 1 denominator) of the collected states.
  Matrix covariance() const;

  void record_jump(double mean_l1) { jumps_.push_back(mean_l1); }
  const std::vector<double>& jumps() const { return jumps_; }
  /// Mean of the jump log over the window that ends `back` windows before
  /// the most recent entry.
  double window_mean(std::size_t window, std::size_t back) const;

 private:
  std::size_t dim_;
  std::size_t n_states_ = 0;
  Vector shift_;
  Vector sum_;
  Matrix outer_;
  std::vector<TransitionPair> pairs_;
  Matrix last_states_;
  Vector last_log_f_;
  Matrix last_grads_;
  std::vector<double> jumps_;
};

struct SigmaCandidate {
  std::string name;
  Matrix sigma;
};

/// Eigenvalue pseudo-inverse, dropping eigenvalues below rel_threshold * lambda_max.
/// Empty optional if the matrix has no positive eigenvalue.
std::optional<Matrix> pseudo_inverse(const Matrix& m, double rel_threshold = 1e-8);

/// Empirical covariance and, when available, precision of a history.
std::vector<SigmaCandidate> history_candidates(const AdaptationHistory& history);
/// Same candidates from a dataset (rows are samples).
std::vector<SigmaCandidate> ebm_sigma_from_data(const Matrix& data);
Matrix sample_covariance(const Matrix& data);

struct SigmaFit {
  std::size_t best = 0;
  std::string name;
  Matrix sigma;
  double gamma0 = 0.0;
  double residual = 0.0;
  /// Per candidate; NaN gamma and infinite residual when all x = 0.
  std::vector<double> gammas;
  std::vector<double> residuals;
};

/// gamma0 = sum x y / sum x^2 per candidate with x = (1/2) delta' Sigma delta;
/// returns the candidate with the lowest sum of squared residuals.
/// Throws DegenerateFitError with fewer than two moving pairs or when every
/// candidate has sum x^2 = 0.
SigmaFit fit_sigma(const std::vector<TransitionPair>& pairs, const std::vector<SigmaCandidate>& candidates);
SigmaFit fit_sigma(const AdaptationHistory& history, const std::vector<SigmaCandidate>& candidates);
SigmaFit fit_sigma(const AdaptationHistory& history);

struct GammaUpdate {
  double gamma;
  double gamma_old;
};

GammaUpdate adapt_gamma(double gamma, double gamma_old, double delta, double jump_new, double jump_old);

struct AdaptiveConfig {
  double eps = 0.1;
  /// Step size while Sigma = 0, before the fit. Defaults to eps.
  std::optional<double> history_eps;
  std::size_t n_chains = 100;
  std::size_t n_sigma = 1000;
  std::size_t n_adapt = 100;
  double delta = 0.25;
  double rho = 0.99;
  std::size_t threads = 1;
};

/// PAVG with an adaptively learned preconditioner. Starts from Sigma = 0
/// (plain AVG), fits Sigma from the history at iteration n_sigma, then tunes
/// gamma every n_adapt iterations once two full post-fit windows exist.
class AdaptivePavg {
 public:
  AdaptivePavg(const Target& target, AdaptiveConfig config);

  /// Runs one iteration on every chain and returns the mean L1 jump.
  double iterate(ChainEnsemble& ensemble);

  std::size_t iteration() const { return t_; }
  const AdaptiveConfig& config() const { return config_; }
  std::shared_ptr<const PreconditionerState> preconditioner() const { return pre_; }
  const AdaptationHistory& history() const { return history_; }
  const std::optional<SigmaFit>& fit() const { return fit_; }
  bool fit_failed() const { return fit_failed_; }
  std::size_t adaptations() const { return adaptations_; }

 private:
  const Target* target_;
  AdaptiveConfig config_;
  std::shared_ptr<PreconditionerState> pre_;
  AdaptationHistory history_;
  std::optional<SigmaFit> fit_;
  bool fit_failed_ = false;
  std::size_t t_ = 0;
  std::size_t adaptations_ = 0;
};

struct AdaptiveResult {
  std::shared_ptr<const PreconditionerState> preconditioner;
  std::optional<SigmaFit> fit;
  std::vector<double> gamma_trace;
  std::vector<double> jump_trace;
  Matrix final_states;
};

AdaptiveResult adaptive_loop(const Target& target, const AdaptiveConfig& config, std::size_t n_iters,
                             std::uint64_t seed,
                             const std::function<void(std::size_t, const ChainEnsemble&)>& on_iteration = {});

}  // namespace dgs
