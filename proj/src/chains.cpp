#include "dgs/chains.hpp"

namespace dgs {

ChainEnsemble::ChainEnsemble(const Target& target, std::size_t n_chains, std::uint64_t seed) {
  chains_.resize(n_chains);
  for (std::size_t i = 0; i < n_chains; ++i) {
    auto& c = chains_[i];
    c.rng = Rng(seed, i);
    c.state = random_state(target.space(), target.sites(), c.rng);
  }
  refresh(target);
}

ChainEnsemble::ChainEnsemble(const Target& target, const Matrix& states, std::uint64_t seed) {
  if (states.cols() != static_cast<Eigen::Index>(target.dim()))
    throw DimensionError("initial states have the wrong number of columns");
  chains_.resize(static_cast<std::size_t>(states.rows()));
  for (std::size_t i = 0; i < chains_.size(); ++i) {
    auto& c = chains_[i];
    c.rng = Rng(seed, i);
    c.state = states.row(static_cast<Eigen::Index>(i)).transpose();
    target.space().require_member(c.state);
  }
  refresh(target);
}

Matrix ChainEnsemble::states() const {
  Matrix out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = chains_[i].state.transpose();
  return out;
}

Vector ChainEnsemble::log_f() const {
  Vector out(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) out[static_cast<Eigen::Index>(i)] = chains_[i].log_f;
  return out;
}

Matrix ChainEnsemble::grads() const {
  Matrix out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = chains_[i].grad.transpose();
  return out;
}

void ChainEnsemble::refresh(const Target& target) {
  for (auto& c : chains_) {
    auto ev = target.evaluate(c.state);
    c.log_f = ev.log_f;
    c.grad = std::move(ev.grad);
  }
}

}  // namespace dgs
