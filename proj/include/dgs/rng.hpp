#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace dgs {

/// Counter-based generator. Output n of stream (seed, stream) is the SplitMix64
/// finalizer applied to key + n * golden, so every chain owns an independent,
/// reproducible sequence regardless of how chains are scheduled.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng() : Rng(0, 0) {}
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Mixes (seed, stream) into a 64-bit key; exposed for deriving sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace dgs
