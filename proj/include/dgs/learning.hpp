#pragma once

#include "dgs/samplers.hpp"
#include "dgs/targets.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace dgs {

enum class Optimizer { SGD, Adam };

struct PcdConfig {
  std::size_t n_iters = 2000;
  std::size_t n_batch = 50;
  std::size_t n_buffer = 5000;
  /// MCMC steps applied to the minibatch per update.
  std::size_t k_steps = 20;
  double learning_rate = 0.0003;
  double l1_strength = 0.01;
  Optimizer optimizer = Optimizer::Adam;
  SamplerConfig sampler;
  /// PAVG only: use the current J as Sigma (gamma = 1), refreshed every update.
  bool model_preconditioner = true;
  std::size_t checkpoint_every = 100;
  std::size_t threads = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PcdCheckpoint {
  std::size_t iteration = 0;
  double frobenius_error = 0.0;
  double acceptance_rate = 0.0;
};

struct IsingEstimate {
  Matrix coupling;
  Vector bias;
  double error = 0.0;
  double acceptance_rate = 0.0;
  std::vector<PcdCheckpoint> trace;
};

/// d f / d J_ij = s_i s_j / 2 per matrix entry, so one sample s = (1, 1)
/// puts 1/2 in both off-diagonal slots.
Matrix ising_coupling_gradient(const Vector& s);

/// (1/n)[sum_data grad_J f - sum_buffer grad_J f] - grad h(J) with
/// h(J) = l1 sum |J_ij| and subgradient 0 at 0. Diagonal fixed at 0.
Matrix pcd_gradient(const Matrix& coupling, const Matrix& data_batch, const Matrix& buffer_batch, double l1_strength);

/// Adam with beta = (0.9, 0.999), eps = 1e-8, for gradient ascent.
class Adam {
 public:
  Adam(Eigen::Index rows, Eigen::Index cols, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  /// Returns the step to add to the parameters.
  Matrix step(const Matrix& gradient);

 private:
  double lr_, beta1_, beta2_, eps_;
  Matrix m_, v_;
  std::size_t t_ = 0;
};

/// Persistent contrastive divergence for the coupling of an Ising model with
/// fixed bias. The buffer chains are persistent; only the minibatch rows
/// evolve each update and are written back.
IsingEstimate pcd_train(const Matrix& data, const Vector& bias, const Matrix& true_coupling, const PcdConfig& config,
                        const std::function<void(const PcdCheckpoint&)>& on_checkpoint = {});

void write_pcd_trace_csv(std::ostream& out, const std::vector<PcdCheckpoint>& trace);

struct GroundTruthOptions {
  std::size_t n_samples = 10000;
  /// Sweeps per chain (parallel mode) or total sweeps (single-chain mode).
  std::size_t n_sweeps = 1000;
  /// One long chain thinned to n_samples instead of n_samples chains.
  bool single_chain = false;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
};

/// Systematic-scan Gibbs samples from an Ising model, one per row.
Matrix generate_ground_truth(const IsingModel& model, const GroundTruthOptions& options);

}  // namespace dgs
