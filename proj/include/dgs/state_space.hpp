#pragma once

#include "dgs/rng.hpp"
#include "dgs/types.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dgs {

enum class SpaceKind { Binary01, BinaryPM1, Ordinal, Categorical };

std::string to_string(SpaceKind kind);

/// Per-dimension discrete support.
///
/// A state lives in R^n. For scalar spaces (binary, ordinal) every entry is
/// one "site" taking a value from values(). For categorical spaces a site is
/// a group of k consecutive entries holding a one-hot vector, so a state with
/// d sites has length d*k. Sites are addressed through option indices
/// 0..support_size()-1, which for scalar spaces index the sorted values.
class StateSpace {
 public:
  static StateSpace binary01();
  static StateSpace binary_pm1();
  /// Values must be finite, strictly increasing and at least two.
  static StateSpace ordinal(std::vector<double> values);
  static StateSpace categorical(std::size_t k);

  SpaceKind kind() const { return kind_; }
  bool is_categorical() const { return kind_ == SpaceKind::Categorical; }

  /// Sorted scalar support; {0, 1} for the entries of a categorical group.
  const std::vector<double>& values() const { return values_; }
  /// Number of options per site (k).
  std::size_t support_size() const { return support_size_; }
  /// Entries per site: k for categorical, 1 otherwise.
  std::size_t group_size() const { return is_categorical() ? support_size_ : 1; }

  std::size_t embedded_dim(std::size_t sites) const { return sites * group_size(); }
  std::size_t site_count(std::size_t embedded_dim) const;

  /// Scalar value of an option (scalar spaces only).
  double option_value(std::size_t option) const;
  /// Index of a scalar value in the support, if present.
  std::optional<std::size_t> index_of(double value) const;

  /// Option held by a site; throws SupportError if the site is not a member.
  std::size_t option_at(const Vector& s, std::size_t site) const;
  void set_option(Vector& s, std::size_t site, std::size_t option) const;

  bool contains(const Vector& s) const;
  void require_member(const Vector& s) const;

  bool operator==(const StateSpace& other) const = default;

 private:
  StateSpace(SpaceKind kind, std::vector<double> values, std::size_t support_size);

  SpaceKind kind_;
  std::vector<double> values_;
  std::size_t support_size_;
};

/// n_points equally spaced values on [lo, hi].
StateSpace make_ordinal_grid(std::size_t n_points, double lo, double hi);

/// |S|^sites, throwing CapacityError if it does not fit in size_t.
std::size_t state_count(const StateSpace& space, std::size_t sites);

/// Lexicographic rank of a state's option indices (last site fastest).
std::size_t state_index(const StateSpace& space, const Vector& s);
Vector state_from_index(const StateSpace& space, std::size_t sites, std::size_t index);

/// Visits every state in lexicographic order of option indices without
/// materializing the list. Refuses (CapacityError) above cap.
void for_each_state(const StateSpace& space, std::size_t sites, std::size_t cap,
                    const std::function<void(const Vector&, std::size_t)>& visit);

std::vector<Vector> enumerate_states(const StateSpace& space, std::size_t sites, std::size_t cap);

/// Independent uniform option per site.
Vector random_state(const StateSpace& space, std::size_t sites, Rng& rng);

/// One row per state, header dim_0..dim_{n-1}.
void write_states_csv(std::ostream& out, const Matrix& states);

}  // namespace dgs
