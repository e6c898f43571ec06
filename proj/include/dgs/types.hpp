#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace dgs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid user-supplied parameter (step size, radius, grid bounds, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Vector or matrix of the wrong shape for the target / space.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A state does not belong to the support of its space.
struct SupportError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration refused because the state count exceeds the cap.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

/// Least-squares scaling fit has no information (no moves in the history).
struct DegenerateFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Preconditioner used after modification without refresh_sqrt().
struct StaleCacheError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace dgs
