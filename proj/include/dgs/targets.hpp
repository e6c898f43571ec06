#pragma once

#include "dgs/rng.hpp"
#include "dgs/state_space.hpp"
#include "dgs/types.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace dgs {

/// f(s) and its gradient at one point.
struct Evaluation {
  double log_f = 0.0;
  Vector grad;
};

/// Unnormalized log-mass f on S^d that is the restriction of a differentiable
/// function on R^n; grad_f is the gradient of that continuous extension.
///
/// Implementations are immutable after construction and safe to evaluate
/// concurrently.
class Target {
 public:
  virtual ~Target() = default;

  virtual const StateSpace& space() const = 0;
  /// Embedded dimension n (d for scalar spaces, d*k for categorical).
  virtual std::size_t dim() const = 0;
  std::size_t sites() const { return space().site_count(dim()); }

  virtual double log_f(const Vector& s) const = 0;
  virtual Vector grad_f(const Vector& s) const = 0;
  virtual Evaluation evaluate(const Vector& s) const { return {log_f(s), grad_f(s)}; }

  /// log f at every option of one site, the other sites held fixed. Values
  /// may be shifted by a constant shared across the options, so only their
  /// differences (the exact conditional) are meaningful.
  virtual void site_log_f(const Vector& s, std::size_t site, std::span<double> out) const;

 protected:
  void check_dim(const Vector& s) const;
};

/// f(s) = b's + 1/2 s'Js on any state space, J symmetric.
class QuadraticTarget : public Target {
 public:
  QuadraticTarget(StateSpace space, Vector bias, Matrix coupling);

  const StateSpace& space() const override { return space_; }
  std::size_t dim() const override { return static_cast<std::size_t>(bias_.size()); }

  double log_f(const Vector& s) const override;
  Vector grad_f(const Vector& s) const override;
  Evaluation evaluate(const Vector& s) const override;
  void site_log_f(const Vector& s, std::size_t site, std::span<double> out) const override;

  const Vector& bias() const { return bias_; }
  const Matrix& coupling() const { return coupling_; }

 private:
  StateSpace space_;
  Vector bias_;
  Matrix coupling_;
};

/// Ising model on {-1,+1}^d: symmetric coupling with zero diagonal.
class IsingModel : public QuadraticTarget {
 public:
  IsingModel(Vector bias, Matrix coupling);
};

double ising_log_f(const IsingModel& m, const Vector& s);
Vector ising_grad_f(const IsingModel& m, const Vector& s);

/// Adjacency of a rows x cols grid scaled by theta. With circular, edges wrap
/// around; a wrap edge that duplicates an existing pair (sides of length 2)
/// collapses into the single entry theta, and length-1 sides add no self loop.
Matrix lattice_coupling(std::size_t rows, std::size_t cols, double theta, bool circular);
IsingModel make_lattice_ising(std::size_t rows, std::size_t cols, double theta, bool circular);

enum class PolyFamily { SecondOrder, FourthOrder };

/// f(s) = log sum_k exp(sum_i g_k(s_i)) with g_k one of the two polynomial
/// families. Components k = 1..K are unweighted.
class OrdinalPolyMixture : public Target {
 public:
  OrdinalPolyMixture(std::size_t dim, PolyFamily family, std::size_t components = 50,
                     StateSpace grid = make_ordinal_grid(50, -1.5, 3.0));

  const StateSpace& space() const override { return space_; }
  std::size_t dim() const override { return dim_; }
  double log_f(const Vector& s) const override;
  Vector grad_f(const Vector& s) const override;
  Evaluation evaluate(const Vector& s) const override;
  void site_log_f(const Vector& s, std::size_t site, std::span<double> out) const override;

  PolyFamily family() const { return family_; }
  std::size_t components() const { return components_; }

  /// g_k(u) and g_k'(u) for component k in 1..K.
  double component_log_factor(std::size_t k, double u) const;
  double component_log_factor_derivative(std::size_t k, double u) const;

  /// Mixture weights of the normalized components (proportional to Z_k^d).
  Vector component_weights() const;
  /// Exact univariate marginals, sites x k (identical rows).
  Matrix exact_marginals() const;
  /// Exact covariance from the mixture moments.
  Matrix exact_covariance() const;
  /// Exact i.i.d. draws: component by weight, then independent per-site softmax.
  Matrix sample_exact(std::size_t n, Rng& rng) const;

 private:
  /// g_k(u) and g_k'(u) for every component at once.
  Eigen::ArrayXd factors(double u) const;
  Eigen::ArrayXd factor_derivatives(double u) const;

  std::size_t dim_;
  PolyFamily family_;
  std::size_t components_;
  StateSpace space_;
  Matrix table_;  // g_k on the grid, components x k
  Matrix site_probs_;  // per-component normalized factor over the grid
  Vector log_norm_;  // log sum_u exp g_k(u)
  Eigen::ArrayXd offsets_;  // per-component shift inside t
};

double ordinal_mixture_log_f(const OrdinalPolyMixture& t, const Vector& s);
Vector ordinal_mixture_grad_f(const OrdinalPolyMixture& t, const Vector& s);

struct RegressionHyper {
  double alpha_pi = 0.001;
  double beta_pi = 10.0;
  double g = 20.0;
  double lambda = 0.001;
  double alpha_sigma = 0.1;
  double beta_sigma = 0.1;
  /// Exponent on the determinant ratio |A|/|B|. The exact marginal likelihood
  /// of the perturbed g-prior has 1/2; 1 gives the unsquared ratio.
  double det_power = 0.5;
};

/// Posterior over binary inclusion masks of a perturbed g-prior linear
/// regression, times `padding` independent Bernoulli(rho_pad) dimensions.
/// State layout: D selection entries followed by the padding entries.
class SparseRegressionPosterior : public Target {
 public:
  SparseRegressionPosterior(Matrix x, Vector y, RegressionHyper hyper = {}, std::size_t padding = 0,
                            double rho_pad = 0.001);

  const StateSpace& space() const override { return space_; }
  std::size_t dim() const override { return covariates() + padding_; }
  double log_f(const Vector& s) const override;
  Vector grad_f(const Vector& s) const override;
  Evaluation evaluate(const Vector& s) const override;

  std::size_t covariates() const { return static_cast<std::size_t>(x_.cols()); }
  std::size_t padding() const { return padding_; }
  double padding_rate() const { return rho_pad_; }
  const RegressionHyper& hyper() const { return hyper_; }
  const Matrix& design() const { return x_; }
  const Vector& response() const { return y_; }

  /// log f restricted to the selection block for a binary mask, computed on
  /// the active columns only. Independent route from log_f.
  double block_log_f(const std::vector<bool>& mask) const;

  struct BlockMoments {
    double log_z = 0.0;  // log normalizer of the selection block
    Vector p1;  // P(s_i = 1)
    Matrix p11;  // P(s_i = 1, s_j = 1)
  };
  /// Exact moments of the selection block by enumerating all 2^D masks.
  BlockMoments exact_block_moments(std::size_t cap = std::size_t{1} << 24) const;
  /// Exact P(s_i=1) and P(s_i=1,s_j=1) over all D+P dimensions.
  std::pair<Vector, Matrix> exact_moments(std::size_t cap = std::size_t{1} << 24) const;

 private:
  Matrix x_;
  Vector y_;
  RegressionHyper hyper_;
  std::size_t padding_;
  double rho_pad_;
  StateSpace space_;
  Matrix gram_;  // X'X
  Vector xty_;  // X'y
  double yty_;
};

struct RegressionData {
  Matrix x;
  Vector y;
};

/// n rows of `base` i.i.d. covariates uniform on {0,1,2} with the response
/// their sum. Remaining columns duplicate them: with 1-based indices column j
/// copies column (j mod base) + 1.
RegressionData make_regression_dataset(Rng& rng, std::size_t n = 20, std::size_t base = 5,
                                       std::size_t columns = 20);

void write_regression_csv(std::ostream& out, const RegressionData& data);

}  // namespace dgs
