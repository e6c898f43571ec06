#pragma once

#include "dgs/chains.hpp"
#include "dgs/samplers.hpp"
#include "dgs/state_space.hpp"
#include "dgs/targets.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dgs {

// ---------------------------------------------------------------------------
// Exact oracles for small state spaces

/// Target normalized by enumeration. States are indexed as in state_index().
struct ExactDistribution {
  std::size_t sites = 0;
  double log_z = 0.0;
  Vector probs;
  /// sites x k univariate marginals over option indices.
  Matrix marginals;
  /// Mean and covariance of the embedded state.
  Vector mean;
  Matrix covariance;
  /// Probability that an entry holds the upper value, and that two entries
  /// jointly do (binary spaces; diagonal equals upper).
  Vector upper;
  Matrix upper_pair;
};

ExactDistribution exact_distribution(const Target& target, std::size_t cap = std::size_t{1} << 22);

struct TransitionOptions {
  /// Negative control: accept on the target ratio alone.
  bool ignore_proposal_ratio = false;
  std::size_t cap = 4096;
};

/// Row-stochastic transition matrix of a fully discrete kernel (Gibbs, GWG,
/// ordinal-GWG, MH-uniform, NCG) assembled by enumerating every proposal.
/// Throws ParameterError for AVG and PAVG.
Matrix transition_matrix(const Target& target, const SamplerConfig& config, const TransitionOptions& options = {});

/// max_b |(pi' P)_b - pi_b|
double stationarity_error(const Matrix& p, const Vector& pi);
/// max_{a,b} |pi_a P_ab - pi_b P_ba|
double detailed_balance_error(const Matrix& p, const Vector& pi);
/// max_a |sum_b P_ab - 1|
double row_sum_error(const Matrix& p);

// ---------------------------------------------------------------------------
// Per-chain statistics

/// Streaming statistics of one chain's history. Consecutive repeats of a
/// state are folded into one weighted update.
class ChainStatistics {
 public:
  ChainStatistics(const StateSpace& space, std::size_t dim, bool covariance, bool pairs);

  void add(const Vector& s);
  double count() const;

  /// sites x k empirical frequencies.
  Matrix marginals() const;
  Matrix counts() const;
  Vector mean() const;
  Matrix covariance() const;
  Vector upper() const;
  Matrix upper_pair() const;

 private:
  void flush() const;

  const StateSpace* space_;
  std::size_t dim_;
  bool track_cov_;
  bool track_pairs_;
  mutable Vector pending_;
  mutable double pending_weight_ = 0.0;
  mutable double total_ = 0.0;
  mutable Matrix counts_;
  mutable Vector shift_;
  mutable Vector sum_;
  mutable Matrix outer_;
  mutable Matrix pair_counts_;
};

/// (1/d) sum_i KL(q_i || p_i) over rows of sites x k marginal tables.
/// Cells with q = 0 contribute 0. A cell with q > 0 and p = 0 uses
/// p = 1/(n k) instead, n being the sample count.
double marginal_kl(const Matrix& empirical, const Matrix& exact, double n_samples);
/// (1/d) sum_i |q_i(1) - p_i(1)|
double marginal_abs_error(const Vector& q_upper, const Vector& p_upper);
/// ||Sigma_q - Sigma_p||_F
double covariance_error(const Matrix& cov_q, const Matrix& cov_p);
/// (1/d^2) sum_{i,j} sum_{k,l in {0,1}} |q_ij(k,l) - p_ij(k,l)| from upper
/// marginals and upper-pair probabilities.
double pairwise_error(const Vector& q_upper, const Matrix& q_pair, const Vector& p_upper, const Matrix& p_pair);

// ---------------------------------------------------------------------------
// Effective sample size

/// Initial-positive-sequence ESS of one trace: n / (-1 + 2 sum_k (rho_2k + rho_2k+1))
/// summed up to the first non-positive pair. Autocorrelations from an FFT.
/// A constant trace has ESS 0.
double ess(const Vector& trace);
/// Per column of an n_steps x n_chains matrix.
Vector ess(const Matrix& traces);
/// Autocorrelation at lags 0..n-1 (1/n normalization).
Vector autocorrelation(const Vector& trace);

/// ||s - reference||_1 for every row.
Vector l1_statistic(const Matrix& states, const Vector& reference);

// ---------------------------------------------------------------------------
// Step-size tuning

struct TuneOptions {
  std::size_t n_steps = 500;
  std::size_t n_chains = 20;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Orders of magnitude 10^lo..10^hi for the eps scan.
  int min_exponent = -3;
  int max_exponent = 3;
  std::vector<std::size_t> coarse_radii = {1, 5, 10, 15, 20};
  /// Half-width of the unit refinement around the best coarse radius.
  std::size_t radius_refine = 4;
};

struct TuneResult {
  double best = 0.0;
  double best_jump = 0.0;
  std::vector<double> values;
  std::vector<double> mean_jumps;
};

/// Mean L1 jump over all steps and chains for every candidate value, each
/// run from the same seed. Applies to eps (NCG, AVG, PAVG) or radius.
TuneResult evaluate_step_sizes(const Target& target, const SamplerConfig& base, const std::vector<double>& values,
                               const TuneOptions& options);
/// Two-phase search: order of magnitude then deciles for eps; coarse radii
/// then unit steps for radii.
TuneResult tune_step_size(const Target& target, const SamplerConfig& base, const TuneOptions& options);

// ---------------------------------------------------------------------------
// Reports

struct Summary {
  double mean = 0.0;
  double se = 0.0;
  double lo = 0.0;  // mean - 1.96 se
  double hi = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};
Summary summarize(const std::vector<double>& values);

struct MetricReport {
  std::string experiment;
  std::string sampler;
  std::size_t checkpoint = 0;
  std::size_t steps = 0;
  double budget = 0.0;
  Summary marginal_error;
  std::optional<Summary> covariance_error;
  std::optional<Summary> pairwise_error;
  std::optional<Summary> ess;
  double acceptance_rate = 0.0;
  double mean_l1_jump = 0.0;
};

std::string to_json(const MetricReport& report);
std::vector<std::string> metric_csv_header();
std::string metric_csv_row(const MetricReport& report);

}  // namespace dgs
