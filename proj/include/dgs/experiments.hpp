#pragma once

#include "dgs/adaptation.hpp"
#include "dgs/diagnostics.hpp"
#include "dgs/learning.hpp"
#include "dgs/samplers.hpp"
#include "dgs/targets.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dgs {

/// Target description. kind: poly2, poly4, ising, regression, quadratic.
struct TargetSpec {
  std::string kind = "poly2";
  std::size_t dim = 20;
  std::size_t support = 50;
  std::size_t components = 50;
  double lo = -1.5;
  double hi = 3.0;
  // lattice
  std::size_t rows = 6;
  std::size_t cols = 6;
  double theta = 0.2;
  bool circular = true;
  // regression
  std::size_t n_data = 20;
  std::size_t base = 5;
  std::size_t covariates = 20;
  std::size_t padding = 80;
  double rho_pad = 0.001;
  RegressionHyper hyper;
  // random quadratic and regression data
  std::uint64_t seed = 0;
};

struct SamplerSpec {
  std::string name;
  std::optional<double> eps;
  std::optional<std::size_t> radius;
};

struct PcdSpec {
  std::size_t n_data = 2000;
  std::size_t gt_sweeps = 100;
  bool gt_single_chain = false;
  std::size_t n_iters = 2000;
  std::size_t n_batch = 50;
  std::size_t n_buffer = 1000;
  double learning_rate = 0.0003;
  double l1_strength = 0.01;
  Optimizer optimizer = Optimizer::Adam;
  std::vector<std::size_t> k_grid = {1, 5, 10, 15, 20};
  std::size_t repetitions = 1;
  std::size_t checkpoint_every = 100;
};

struct ExperimentConfig {
  /// sample, tune, ordinal, regression, ising-pcd, oracle-check
  std::string experiment = "sample";
  TargetSpec target;
  std::vector<SamplerSpec> samplers;
  std::size_t n_chains = 100;
  /// Post burn-in budget in gradient-step units per chain (steps mode).
  std::size_t n_steps = 10000;
  std::size_t burn_in = 2000;
  std::size_t checkpoints = 10;
  /// "steps" or "wall"
  std::string budget = "steps";
  double wall_minutes = 10.0;
  double burn_minutes = 1.0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out = "out";
  bool paper_scale = false;
  // adaptive PAVG
  std::size_t n_sigma = 1000;
  std::size_t n_adapt = 100;
  double delta = 0.25;
  double rho = 0.99;
  /// PAVG step size before the preconditioner is fitted; AVG's when unset.
  std::optional<double> history_eps;
  /// Exact draws behind the reference covariance.
  std::size_t exact_draws = 100000;
  CostModel costs;
  std::size_t snapshot_every = 0;
  TuneOptions tune;
  PcdSpec pcd;

  void validate() const;
};

/// Defaults for an experiment, optionally at the full published scale.
ExperimentConfig default_config(const std::string& experiment, bool paper_scale = false);
/// Overlays the keys present in `j` on `base`. Unknown keys are errors.
ExperimentConfig parse_config(const nlohmann::json& j, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, const std::string& experiment = "", bool paper_scale = false);
nlohmann::json config_to_json(const ExperimentConfig& config);

std::unique_ptr<Target> make_target(const TargetSpec& spec);
/// Published step size or radius for a sampler on a target kind, with the
/// explicit eps or radius applied on top. PAVG gets a preconditioner only when the caller
/// provides one.
SamplerConfig sampler_config(const SamplerSpec& spec, const std::string& target_kind);
/// Default sampler line-up of an experiment.
std::vector<SamplerSpec> default_samplers(const std::string& experiment, const std::string& target_kind);

std::string version_string();

/// Writes `<stem>.json` next to `<stem>.csv`: config echo, version and seed.
void write_metadata(const std::string& csv_path, const ExperimentConfig& config, const nlohmann::json& extra = {});

// ---------------------------------------------------------------------------

struct SamplerRun {
  std::string sampler;
  SamplerConfig config;
  std::size_t steps = 0;
  double cost = 0.0;
  std::vector<MetricReport> reports;
  Vector ess;
  double acceptance_rate = 0.0;
  double mean_l1_jump = 0.0;
  /// Adaptive PAVG: gamma at the end of burn-in.
  std::optional<double> gamma;
};

struct ProtocolResult {
  std::string experiment;
  std::vector<SamplerRun> runs;
  const SamplerRun* find(const std::string& sampler) const;
};

/// Ordinal mixture protocol: marginal KL and covariance error per chain at
/// every checkpoint, then ESS of the L1 statistic.
ProtocolResult cmd_ordinal(const ExperimentConfig& config);
/// Sparse regression protocol: absolute marginal and pairwise error against
/// exact block enumeration.
ProtocolResult cmd_regression(const ExperimentConfig& config);

struct PcdRun {
  std::string sampler;
  std::size_t k = 0;
  std::size_t repetition = 0;
  double error = 0.0;
  double acceptance_rate = 0.0;
};

struct PcdResult {
  double true_norm = 0.0;
  std::vector<PcdRun> runs;
  /// Mean final error over repetitions for one (sampler, K) cell.
  double mean_error(const std::string& sampler, std::size_t k) const;
};

/// Sampler configuration whose budget per PCD update matches K gradient steps.
SamplerConfig budget_matched(const SamplerConfig& config, std::size_t k, std::size_t sites, const CostModel& costs,
                             std::size_t& steps_out);

PcdResult cmd_ising_pcd(const ExperimentConfig& config);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// Negative controls pass when value exceeds the threshold.
  bool expect_failure = false;
  bool pass = false;
};

std::vector<OracleCheck> cmd_oracle_check(const ExperimentConfig& config);

struct SampleResult {
  Trace trace;
  Matrix final_states;
};
SampleResult cmd_sample(const ExperimentConfig& config);

std::vector<TuneResult> cmd_tune(const ExperimentConfig& config);

}  // namespace dgs
