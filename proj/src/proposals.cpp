#include "dgs/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dgs {
namespace {

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("step size eps must be positive and finite");
}

void check_len(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw DimensionError(std::string(what) + " has the wrong length");
}

}  // namespace

FactorizedProposal::FactorizedProposal(const StateSpace& space, Vector linear, Vector quadratic)
    : space_(&space), a_(std::move(linear)), b_(std::move(quadratic)) {
  check_len(b_, a_.size(), "quadratic coefficient vector");
  const auto sites = space.site_count(static_cast<std::size_t>(a_.size()));
  const auto k = static_cast<Eigen::Index>(space.support_size());
  log_z_.resize(static_cast<Eigen::Index>(sites));
  Eigen::ArrayXd logits(k);
  for (std::size_t i = 0; i < sites; ++i) {
    fill_logits(i, logits);
    const double mx = logits.maxCoeff();
    if (!std::isfinite(mx) || !logits.allFinite()) throw ParameterError("proposal logits must be finite");
    log_z_[static_cast<Eigen::Index>(i)] = mx + std::log((logits - mx).exp().sum());
  }
}

void FactorizedProposal::fill_logits(std::size_t site, Eigen::ArrayXd& out) const {
  const auto k = static_cast<Eigen::Index>(space_->support_size());
  if (space_->is_categorical()) {
    const auto base = static_cast<Eigen::Index>(site) * k;
    out = a_.segment(base, k).array() + b_.segment(base, k).array();
    return;
  }
  const Eigen::Map<const Eigen::ArrayXd> v(space_->values().data(), k);
  const auto i = static_cast<Eigen::Index>(site);
  out = a_[i] * v + b_[i] * v.square();
}

double FactorizedProposal::site_logit(std::size_t site, std::size_t option) const {
  if (space_->is_categorical()) {
    const auto e = static_cast<Eigen::Index>(site * space_->support_size() + option);
    return a_[e] + b_[e];
  }
  const double v = space_->values()[option];
  const auto i = static_cast<Eigen::Index>(site);
  return a_[i] * v + b_[i] * v * v;
}

std::vector<double> FactorizedProposal::site_probabilities(std::size_t site) const {
  std::vector<double> p(space_->support_size());
  for (std::size_t o = 0; o < p.size(); ++o) p[o] = std::exp(site_logit(site, o) - site_log_normalizer(site));
  return p;
}

double FactorizedProposal::log_pmf(const Vector& s) const {
  check_len(s, a_.size(), "state");
  double total = 0.0;
  for (std::size_t i = 0; i < sites(); ++i)
    total += site_logit(i, space_->option_at(s, i)) - site_log_normalizer(i);
  return total;
}

Vector FactorizedProposal::sample(Rng& rng) const {
  const auto k = static_cast<Eigen::Index>(space_->support_size());
  Vector out = Vector::Zero(a_.size());
  Eigen::ArrayXd mass(k);
  for (std::size_t i = 0; i < sites(); ++i) {
    fill_logits(i, mass);
    mass = (mass - site_log_normalizer(i)).exp();
    double u = rng.uniform();
    Eigen::Index chosen = k - 1;
    for (Eigen::Index o = 0; o + 1 < k; ++o) {
      u -= mass[o];
      if (u < 0.0) {
        chosen = o;
        break;
      }
    }
    space_->set_option(out, i, static_cast<std::size_t>(chosen));
  }
  return out;
}

FactorizedProposal build_ncg(const StateSpace& space, const Vector& s, const Vector& grad, double eps) {
  check_eps(eps);
  check_len(grad, s.size(), "gradient");
  Vector a = 0.5 * grad + s / eps;
  Vector b = Vector::Constant(s.size(), -1.0 / (2.0 * eps));
  return {space, std::move(a), std::move(b)};
}

FactorizedProposal build_avg(const StateSpace& space, const Vector& s, const Vector& grad, const Vector& z,
                             double eps) {
  check_eps(eps);
  check_len(grad, s.size(), "gradient");
  check_len(z, s.size(), "auxiliary vector");
  Vector a = grad + std::sqrt(2.0 / eps) * z;
  Vector b = Vector::Constant(s.size(), -1.0 / eps);
  return {space, std::move(a), std::move(b)};
}

FactorizedProposal build_pavg(const StateSpace& space, const Vector& s, const Vector& grad, const Vector& z,
                              const PreconditionerState& pre) {
  if (!pre.fresh()) throw StaleCacheError("preconditioner changed since the last refresh_sqrt()");
  check_len(grad, s.size(), "gradient");
  check_len(z, s.size(), "auxiliary vector");
  if (static_cast<Eigen::Index>(pre.dim()) != s.size()) throw DimensionError("preconditioner dimension mismatch");
  if (pre.isotropic()) return build_avg(space, s, grad, z, pre.eps());
  Vector a = grad - pre.scaled() * s + pre.sqrt_shifted() * z;
  Vector b = Vector::Constant(s.size(), -0.5 * pre.d_eps());
  return {space, std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------

SingleSiteProposal::SingleSiteProposal(std::vector<SiteMove> moves) : moves_(std::move(moves)) {
  if (moves_.empty()) throw ParameterError("single-site proposal has no moves");
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& m : moves_) mx = std::max(mx, m.log_weight);
  if (!std::isfinite(mx)) throw ParameterError("single-site proposal weights must be finite");
  double sum = 0.0;
  for (const auto& m : moves_) sum += std::exp(m.log_weight - mx);
  log_norm_ = mx + std::log(sum);
}

std::optional<std::size_t> SingleSiteProposal::find(std::size_t site, std::size_t option) const {
  for (std::size_t i = 0; i < moves_.size(); ++i)
    if (moves_[i].site == site && moves_[i].option == option) return i;
  return std::nullopt;
}

std::size_t SingleSiteProposal::sample(Rng& rng) const {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < moves_.size(); ++i) {
    u -= std::exp(log_prob(i));
    if (u < 0.0) return i;
  }
  return moves_.size() - 1;
}

namespace {

SingleSiteProposal local_proposal(const StateSpace& space, const Vector& s, const Vector& grad,
                                  std::size_t radius) {
  check_len(grad, s.size(), "gradient");
  const auto sites = space.site_count(static_cast<std::size_t>(s.size()));
  const auto k = space.support_size();
  std::vector<SiteMove> moves;
  moves.reserve(sites * std::min(k - 1, 2 * radius));
  for (std::size_t i = 0; i < sites; ++i) {
    const auto current = space.option_at(s, i);
    const auto lo = current >= radius ? current - radius : 0;
    const auto hi = std::min(k - 1, current + radius);
    for (std::size_t o = lo; o <= hi; ++o) {
      if (o == current) continue;
      double change = 0.0;
      if (space.is_categorical()) {
        const auto base = static_cast<Eigen::Index>(i * k);
        change = grad[base + static_cast<Eigen::Index>(o)] - grad[base + static_cast<Eigen::Index>(current)];
      } else {
        change = grad[static_cast<Eigen::Index>(i)] * (space.values()[o] - space.values()[current]);
      }
      moves.push_back({i, o, 0.5 * change});
    }
  }
  return SingleSiteProposal(std::move(moves));
}

}  // namespace

SingleSiteProposal build_gwg(const StateSpace& space, const Vector& s, const Vector& grad) {
  return local_proposal(space, s, grad, space.support_size());
}

SingleSiteProposal build_ordinal_gwg(const StateSpace& space, const Vector& s, const Vector& grad,
                                     std::size_t radius) {
  if (radius == 0) throw ParameterError("ordinal-GWG radius must be at least 1");
  return local_proposal(space, s, grad, radius);
}

// ---------------------------------------------------------------------------

UniformBallProposal::UniformBallProposal(const StateSpace& space, const Vector& s, std::size_t radius)
    : space_(&space), log_size_(0.0) {
  if (space.is_categorical()) throw ParameterError("uniform-ball proposals need a scalar (binary/ordinal) space");
  if (radius == 0) throw ParameterError("uniform-ball radius must be at least 1");
  const auto sites = space.site_count(static_cast<std::size_t>(s.size()));
  const auto k = space.support_size();
  lo_.resize(sites);
  hi_.resize(sites);
  for (std::size_t i = 0; i < sites; ++i) {
    const auto c = space.option_at(s, i);
    lo_[i] = c >= radius ? c - radius : 0;
    hi_[i] = std::min(k - 1, c + radius);
    log_size_ += std::log(static_cast<double>(hi_[i] - lo_[i] + 1));
  }
}

std::size_t UniformBallProposal::support_size() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    const auto w = hi_[i] - lo_[i] + 1;
    if (n > std::numeric_limits<std::size_t>::max() / w) return 0;
    n *= w;
  }
  return n;
}

bool UniformBallProposal::contains(const Vector& s) const {
  if (static_cast<std::size_t>(s.size()) != lo_.size()) return false;
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    const auto idx = space_->index_of(s[static_cast<Eigen::Index>(i)]);
    if (!idx || *idx < lo_[i] || *idx > hi_[i]) return false;
  }
  return true;
}

double UniformBallProposal::log_pmf(const Vector& s) const {
  return contains(s) ? -log_size_ : -std::numeric_limits<double>::infinity();
}

Vector UniformBallProposal::sample(Rng& rng) const {
  Vector out(static_cast<Eigen::Index>(lo_.size()));
  for (std::size_t i = 0; i < lo_.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = space_->values()[lo_[i] + rng.uniform_index(hi_[i] - lo_[i] + 1)];
  return out;
}

UniformBallProposal build_uniform_ball(const StateSpace& space, const Vector& s, std::size_t radius) {
  return UniformBallProposal(space, s, radius);
}

}  // namespace dgs
