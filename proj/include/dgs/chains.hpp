#pragma once

#include "dgs/rng.hpp"
#include "dgs/targets.hpp"
#include "dgs/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dgs {

/// One chain: its state, the cached f and grad f at that state, and its own
/// random stream.
struct Chain {
  Vector state;
  double log_f = 0.0;
  Vector grad;
  Rng rng;
};

/// Parallel chains over one target. Chain i draws from stream (seed, i).
class ChainEnsemble {
 public:
  /// Uniformly random initial states, drawn from each chain's own stream.
  ChainEnsemble(const Target& target, std::size_t n_chains, std::uint64_t seed);
  /// Given initial states, one per row.
  ChainEnsemble(const Target& target, const Matrix& states, std::uint64_t seed);

  std::size_t size() const { return chains_.size(); }
  std::size_t dim() const { return chains_.empty() ? 0 : static_cast<std::size_t>(chains_[0].state.size()); }
  Chain& operator[](std::size_t i) { return chains_[i]; }
  const Chain& operator[](std::size_t i) const { return chains_[i]; }
  std::vector<Chain>& chains() { return chains_; }
  const std::vector<Chain>& chains() const { return chains_; }

  /// n_chains x dim.
  Matrix states() const;
  Vector log_f() const;
  Matrix grads() const;

  /// Recomputes every cached f and grad f.
  void refresh(const Target& target);

  std::size_t steps() const { return steps_; }
  void advance(std::size_t n) { steps_ += n; }

 private:
  std::vector<Chain> chains_;
  std::size_t steps_ = 0;
};

}  // namespace dgs
