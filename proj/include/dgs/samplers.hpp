#pragma once

#include "dgs/chains.hpp"
#include "dgs/preconditioner.hpp"
#include "dgs/rng.hpp"
#include "dgs/targets.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace dgs {

enum class SamplerKind { Gibbs, GWG, OrdinalGWG, MHUniform, NCG, AVG, PAVG };
enum class GibbsScan { Systematic, Random };

std::string to_string(SamplerKind kind);
/// Accepts gibbs, gwg, ordinal-gwg, mh-uniform, ncg, avg, pavg.
SamplerKind sampler_kind_from_string(const std::string& name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::NCG;
  double eps = 0.1;
  std::size_t radius = 1;
  std::shared_ptr<const PreconditionerState> preconditioner;
  GibbsScan scan = GibbsScan::Systematic;
  /// Site updates per step under random scan.
  std::size_t gibbs_updates = 1;

  /// Throws ParameterError if the kind's required parameter is missing or invalid.
  void validate() const;
};

struct StepOutcome {
  bool accepted = false;
  double log_accept_ratio = 0.0;
  /// ||s_{t+1} - s_t||_1; zero when rejected.
  double l1_jump = 0.0;
};

double mh_log_ratio(double log_f_new, double log_f_old, double log_q_rev, double log_q_fwd,
                    double log_aux_ratio = 0.0);
/// Draws u ~ U[0,1) and accepts iff log u < log_ratio. NaN rejects.
bool mh_accept(double log_ratio, Rng& rng);
bool mh_accept(double log_f_new, double log_f_old, double log_q_rev, double log_q_fwd, double log_aux_ratio,
               Rng& rng);

StepOutcome ncg_step(const Target& target, Chain& chain, double eps);
StepOutcome avg_step(const Target& target, Chain& chain, double eps);
StepOutcome pavg_step(const Target& target, Chain& chain, const PreconditionerState& pre);
StepOutcome gwg_step(const Target& target, Chain& chain);
StepOutcome ordinal_gwg_step(const Target& target, Chain& chain, std::size_t radius);
StepOutcome mh_uniform_step(const Target& target, Chain& chain, std::size_t radius);
/// Systematic: one sweep over all sites in order. Random: `updates` sites
/// drawn uniformly with replacement.
StepOutcome gibbs_step(const Target& target, Chain& chain, GibbsScan scan, std::size_t updates = 1);

StepOutcome step(const Target& target, const SamplerConfig& config, Chain& chain);

/// Cost of one step in target-evaluation units (one f + grad f).
struct CostModel {
  double gradient_step = 1.0;  // NCG, AVG, PAVG
  double local_step = 2.0;  // GWG, ordinal-GWG: forward and reverse gradients
  double uniform_step = 1.0;  // MH-uniform
  double gibbs_site = 1.0;  // one exact conditional update
};
double step_cost(const SamplerConfig& config, std::size_t sites, const CostModel& costs = {});

/// Per-step, per-chain acceptance records, stored step-major.
struct Trace {
  std::size_t n_steps = 0;
  std::size_t n_chains = 0;
  std::vector<unsigned char> accepted;
  std::vector<double> log_accept_ratio;
  std::vector<double> l1_jump;
  /// States every snapshot_every steps (after the step), with their step index.
  std::vector<std::size_t> snapshot_steps;
  std::vector<Matrix> snapshots;

  std::size_t index(std::size_t step, std::size_t chain) const { return step * n_chains + chain; }
  double acceptance_rate() const;
  double mean_l1_jump() const;
  /// Mean jump over chains at one step.
  double step_mean_l1_jump(std::size_t step) const;
  void write_csv(std::ostream& out) const;
};

struct RunOptions {
  std::size_t n_steps = 0;
  std::size_t snapshot_every = 0;
  std::size_t threads = 1;
  bool record = true;
  /// Called after every `callback_every` steps with the number of steps done.
  std::size_t callback_every = 0;
  std::function<void(std::size_t, ChainEnsemble&)> on_checkpoint;
};

/// Applies the kernel n_steps times to every chain. Chains run in parallel
/// between checkpoints; the result does not depend on the thread count.
Trace run_chain(const Target& target, const SamplerConfig& config, ChainEnsemble& ensemble,
                const RunOptions& options);

}  // namespace dgs
