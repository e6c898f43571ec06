#pragma once

#include "dgs/rng.hpp"
#include "dgs/targets.hpp"
#include "dgs/types.hpp"

#include <algorithm>
#include <cmath>

namespace dgs::testing {

/// Largest |analytic - central difference| over coordinates, relative to
/// max(1, |central difference|).
inline double gradient_error(const Target& t, const Vector& s, double h = 1e-5) {
  const Vector g = t.grad_f(s);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Vector up = s, down = s;
    up[i] += h;
    down[i] -= h;
    const double fd = (t.log_f(up) - t.log_f(down)) / (2.0 * h);
    worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

/// Symmetric coupling with zero diagonal and N(0, scale^2) entries.
inline Matrix random_coupling(std::size_t d, double scale, Rng& rng) {
  Matrix j = Matrix::Zero(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) j(a, b) = j(b, a) = scale * rng.normal();
  return j;
}

inline Vector random_vector(std::size_t d, double scale, Rng& rng) {
  Vector v(d);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

inline IsingModel random_ising(std::size_t d, Rng& rng, double scale = 0.5) {
  return IsingModel(random_vector(d, scale, rng), random_coupling(d, scale, rng));
}

}  // namespace dgs::testing
