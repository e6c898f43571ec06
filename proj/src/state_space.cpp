#include "dgs/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace dgs {

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Binary01: return "binary01";
    case SpaceKind::BinaryPM1: return "binary_pm1";
    case SpaceKind::Ordinal: return "ordinal";
    case SpaceKind::Categorical: return "categorical";
  }
  return "unknown";
}

StateSpace::StateSpace(SpaceKind kind, std::vector<double> values, std::size_t support_size)
    : kind_(kind), values_(std::move(values)), support_size_(support_size) {}

StateSpace StateSpace::binary01() { return {SpaceKind::Binary01, {0.0, 1.0}, 2}; }

StateSpace StateSpace::binary_pm1() { return {SpaceKind::BinaryPM1, {-1.0, 1.0}, 2}; }

StateSpace StateSpace::ordinal(std::vector<double> values) {
  if (values.size() < 2) throw ParameterError("ordinal space needs at least two values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ParameterError("ordinal values must be finite");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw ParameterError("ordinal values must be strictly increasing");
  }
  const auto k = values.size();
  return {SpaceKind::Ordinal, std::move(values), k};
}

StateSpace StateSpace::categorical(std::size_t k) {
  if (k < 2) throw ParameterError("categorical space needs k >= 2");
  return {SpaceKind::Categorical, {0.0, 1.0}, k};
}

std::size_t StateSpace::site_count(std::size_t embedded_dim) const {
  if (embedded_dim % group_size() != 0)
    throw DimensionError("state length is not a multiple of the categorical group size");
  return embedded_dim / group_size();
}

double StateSpace::option_value(std::size_t option) const {
  if (is_categorical()) throw ParameterError("categorical options have no scalar value");
  if (option >= values_.size()) throw ParameterError("option index out of range");
  return values_[option];
}

std::optional<std::size_t> StateSpace::index_of(double value) const {
  const auto it = std::lower_bound(values_.begin(), values_.end(), value);
  const double scale = 1e-9 * std::max(1.0, std::abs(value));
  if (it != values_.end() && std::abs(*it - value) <= scale)
    return static_cast<std::size_t>(it - values_.begin());
  if (it != values_.begin() && std::abs(*(it - 1) - value) <= scale)
    return static_cast<std::size_t>(it - values_.begin() - 1);
  return std::nullopt;
}

std::size_t StateSpace::option_at(const Vector& s, std::size_t site) const {
  if (!is_categorical()) {
    if (auto idx = index_of(s[static_cast<Eigen::Index>(site)])) return *idx;
    std::ostringstream msg;
    msg << "entry " << site << " = " << s[static_cast<Eigen::Index>(site)]
        << " is not in the " << to_string(kind_) << " support";
    throw SupportError(msg.str());
  }
  const auto k = support_size_;
  std::size_t hot = k;
  for (std::size_t o = 0; o < k; ++o) {
    const double v = s[static_cast<Eigen::Index>(site * k + o)];
    if (v == 1.0) {
      if (hot != k) throw SupportError("categorical group has more than one hot entry");
      hot = o;
    } else if (v != 0.0) {
      throw SupportError("categorical entries must be 0 or 1");
    }
  }
  if (hot == k) throw SupportError("categorical group has no hot entry");
  return hot;
}

void StateSpace::set_option(Vector& s, std::size_t site, std::size_t option) const {
  if (option >= support_size_) throw ParameterError("option index out of range");
  if (!is_categorical()) {
    s[static_cast<Eigen::Index>(site)] = values_[option];
    return;
  }
  const auto k = static_cast<Eigen::Index>(support_size_);
  s.segment(static_cast<Eigen::Index>(site) * k, k).setZero();
  s[static_cast<Eigen::Index>(site) * k + static_cast<Eigen::Index>(option)] = 1.0;
}

bool StateSpace::contains(const Vector& s) const {
  if (s.size() % static_cast<Eigen::Index>(group_size()) != 0) return false;
  const auto sites = site_count(static_cast<std::size_t>(s.size()));
  try {
    for (std::size_t i = 0; i < sites; ++i) (void)option_at(s, i);
  } catch (const SupportError&) {
    return false;
  }
  return true;
}

void StateSpace::require_member(const Vector& s) const {
  const auto sites = site_count(static_cast<std::size_t>(s.size()));
  for (std::size_t i = 0; i < sites; ++i) (void)option_at(s, i);
}

StateSpace make_ordinal_grid(std::size_t n_points, double lo, double hi) {
  if (n_points < 2) throw ParameterError("ordinal grid needs n_points >= 2");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw ParameterError("ordinal grid needs finite lo < hi");
  std::vector<double> values(n_points);
  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) values[i] = lo + static_cast<double>(i) * step;
  values.back() = hi;
  return StateSpace::ordinal(std::move(values));
}

std::size_t state_count(const StateSpace& space, std::size_t sites) {
  const std::size_t k = space.support_size();
  std::size_t count = 1;
  for (std::size_t i = 0; i < sites; ++i) {
    if (count > std::numeric_limits<std::size_t>::max() / k)
      throw CapacityError("state count overflows size_t");
    count *= k;
  }
  return count;
}

std::size_t state_index(const StateSpace& space, const Vector& s) {
  const auto sites = space.site_count(static_cast<std::size_t>(s.size()));
  std::size_t index = 0;
  for (std::size_t i = 0; i < sites; ++i) index = index * space.support_size() + space.option_at(s, i);
  return index;
}

Vector state_from_index(const StateSpace& space, std::size_t sites, std::size_t index) {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(space.embedded_dim(sites)));
  const auto k = space.support_size();
  for (std::size_t i = sites; i-- > 0;) {
    space.set_option(s, i, index % k);
    index /= k;
  }
  return s;
}

void for_each_state(const StateSpace& space, std::size_t sites, std::size_t cap,
                    const std::function<void(const Vector&, std::size_t)>& visit) {
  std::size_t total = 0;
  try {
    total = state_count(space, sites);
  } catch (const CapacityError&) {
    throw CapacityError("state space too large to enumerate (more than 2^64 states)");
  }
  if (total > cap) {
    std::ostringstream msg;
    msg << "refusing to enumerate " << total << " states (|S|=" << space.support_size()
        << ", sites=" << sites << ") above cap " << cap;
    throw CapacityError(msg.str());
  }
  const auto k = space.support_size();
  std::vector<std::size_t> digits(sites, 0);
  Vector s = state_from_index(space, sites, 0);
  for (std::size_t index = 0; index < total; ++index) {
    visit(s, index);
    // odometer increment, last site fastest
    for (std::size_t i = sites; i-- > 0;) {
      if (++digits[i] < k) {
        space.set_option(s, i, digits[i]);
        break;
      }
      digits[i] = 0;
      space.set_option(s, i, 0);
    }
  }
}

std::vector<Vector> enumerate_states(const StateSpace& space, std::size_t sites, std::size_t cap) {
  std::vector<Vector> out;
  for_each_state(space, sites, cap, [&](const Vector& s, std::size_t) { out.push_back(s); });
  return out;
}

Vector random_state(const StateSpace& space, std::size_t sites, Rng& rng) {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(space.embedded_dim(sites)));
  for (std::size_t i = 0; i < sites; ++i) space.set_option(s, i, rng.uniform_index(space.support_size()));
  return s;
}

void write_states_csv(std::ostream& out, const Matrix& states) {
  for (Eigen::Index j = 0; j < states.cols(); ++j) out << (j ? "," : "") << "dim_" << j;
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    for (Eigen::Index j = 0; j < states.cols(); ++j) out << (j ? "," : "") << states(i, j);
    out << '\n';
  }
}

}  // namespace dgs
