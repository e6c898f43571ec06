#pragma once

#include "dgs/preconditioner.hpp"
#include "dgs/rng.hpp"
#include "dgs/state_space.hpp"
#include "dgs/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace dgs {

/// Fully factorized proposal with unnormalized log-mass a's + b'(s .* s),
/// normalized independently per site (per one-hot group for categorical
/// spaces). Shared by NCG, AVG and PAVG.
///
/// Holds a pointer to the space; the space must outlive the proposal.
class FactorizedProposal {
 public:
  FactorizedProposal(const StateSpace& space, Vector linear, Vector quadratic);

  const Vector& linear() const { return a_; }
  const Vector& quadratic() const { return b_; }
  const StateSpace& space() const { return *space_; }
  std::size_t sites() const { return static_cast<std::size_t>(log_z_.size()); }

  /// Unnormalized log-mass of one option of one site.
  double site_logit(std::size_t site, std::size_t option) const;
  double site_log_normalizer(std::size_t site) const { return log_z_[static_cast<Eigen::Index>(site)]; }
  std::vector<double> site_probabilities(std::size_t site) const;

  double log_pmf(const Vector& s) const;
  /// Independent inverse-CDF draw per site.
  Vector sample(Rng& rng) const;

 private:
  void fill_logits(std::size_t site, Eigen::ArrayXd& out) const;

  const StateSpace* space_;
  Vector a_;
  Vector b_;
  Vector log_z_;
};

/// a = grad/2 + s/eps, b = -1/(2 eps).
FactorizedProposal build_ncg(const StateSpace& space, const Vector& s, const Vector& grad, double eps);
/// a = grad + sqrt(2/eps) z, b = -1/eps.
FactorizedProposal build_avg(const StateSpace& space, const Vector& s, const Vector& grad, const Vector& z,
                             double eps);
/// a = grad - (gamma Sigma) s + Sigma_eps^{1/2} z, b = -d_eps / 2.
FactorizedProposal build_pavg(const StateSpace& space, const Vector& s, const Vector& grad, const Vector& z,
                              const PreconditionerState& pre);

struct SiteMove {
  std::size_t site;
  std::size_t option;
  double log_weight;
};

/// Proposal over states that differ from the current one at exactly one site.
class SingleSiteProposal {
 public:
  explicit SingleSiteProposal(std::vector<SiteMove> moves);

  const std::vector<SiteMove>& moves() const { return moves_; }
  double log_normalizer() const { return log_norm_; }
  double log_prob(std::size_t move) const { return moves_[move].log_weight - log_norm_; }
  std::optional<std::size_t> find(std::size_t site, std::size_t option) const;
  std::size_t sample(Rng& rng) const;

 private:
  std::vector<SiteMove> moves_;
  double log_norm_;
};

/// First-order Taylor proposal over the Hamming ball of radius one: every
/// other option of every site, weighted exp(grad'(s' - s) / 2).
SingleSiteProposal build_gwg(const StateSpace& space, const Vector& s, const Vector& grad);
/// As build_gwg but restricted to options within r grid indices of the
/// current one (current excluded, clipped at the boundary).
SingleSiteProposal build_ordinal_gwg(const StateSpace& space, const Vector& s, const Vector& grad,
                                     std::size_t radius);

/// Uniform proposal over the lattice box of per-site index radius r around
/// the current state, the current state included.
class UniformBallProposal {
 public:
  UniformBallProposal(const StateSpace& space, const Vector& s, std::size_t radius);

  double log_support_size() const { return log_size_; }
  /// Exact support size, or 0 if it overflows size_t.
  std::size_t support_size() const;
  bool contains(const Vector& s) const;
  double log_pmf(const Vector& s) const;
  Vector sample(Rng& rng) const;

 private:
  const StateSpace* space_;
  std::vector<std::size_t> lo_;
  std::vector<std::size_t> hi_;
  double log_size_;
};

UniformBallProposal build_uniform_ball(const StateSpace& space, const Vector& s, std::size_t radius);

}  // namespace dgs
