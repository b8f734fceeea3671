#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "exactpen/design_matrix.hpp"

namespace exactpen {

/// Sorted list of coordinates that are never penalized (e.g. an intercept).
class ExcludedSet {
public:
  ExcludedSet() = default;
  ExcludedSet(std::initializer_list<Index> idx) : ExcludedSet(std::vector<Index>(idx)) {}
  explicit ExcludedSet(std::vector<Index> idx) : idx_(std::move(idx)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
  }

  bool contains(Index j) const { return std::binary_search(idx_.begin(), idx_.end(), j); }
  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  const std::vector<Index> &indices() const { return idx_; }

  /// Per-coordinate mask of length p; true means penalized.
  std::vector<bool> penalized_mask(Index p) const {
    std::vector<bool> mask(static_cast<std::size_t>(p), true);
    for (Index j : idx_) {
      if (j < 0 || j >= p)
        throw RangeError("excluded index " + std::to_string(j) + " outside [0, p)");
      mask[static_cast<std::size_t>(j)] = false;
    }
    return mask;
  }

  friend bool operator==(const ExcludedSet &, const ExcludedSet &) = default;

private:
  std::vector<Index> idx_;
};

enum class SubgradientPolicy { canonical, extreme_negative, index_order };

/// A vector in {0, +1, -1}^p: one linear piece <v, x> of the largest-K norm.
struct SignPattern {
  std::vector<std::int8_t> entries;

  Index size() const { return static_cast<Index>(entries.size()); }
  Index support_size() const {
    return std::count_if(entries.begin(), entries.end(), [](auto e) { return e != 0; });
  }
  double dot(const Vector &x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < entries.size(); ++j)
      if (entries[j] != 0)
        s += entries[j] * x[static_cast<Index>(j)];
    return s;
  }
  Vector to_vector() const {
    Vector v(size());
    for (Index j = 0; j < size(); ++j)
      v[j] = entries[static_cast<std::size_t>(j)];
    return v;
  }

  friend bool operator==(const SignPattern &, const SignPattern &) = default;
};

namespace detail {

inline Index penalized_count(Index p, const ExcludedSet &excluded) {
  return p - static_cast<Index>(std::count_if(excluded.indices().begin(),
                                              excluded.indices().end(),
                                              [p](Index j) { return j >= 0 && j < p; }));
}

inline void check_k(Index K, Index p, const ExcludedSet &excluded) {
  if (K < 0 || K > penalized_count(p, excluded))
    throw RangeError("K = " + std::to_string(K) + " outside [0, " +
                     std::to_string(penalized_count(p, excluded)) + "]");
}

/// Penalized coordinates ordered by (|v_j| descending, j ascending).
inline std::vector<Index> magnitude_order(const Vector &v, const ExcludedSet &excluded) {
  const auto mask = excluded.penalized_mask(v.size());
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(v.size()));
  for (Index j = 0; j < v.size(); ++j)
    if (mask[static_cast<std::size_t>(j)])
      order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ma = std::abs(v[a]);
    const double mb = std::abs(v[b]);
    return ma > mb;
  });
  return order;
}

inline double sign_of(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace detail

/// Indices of the K largest-magnitude penalized coordinates, ties broken by lower index.
inline std::vector<Index> top_k_indices(const Vector &x, Index K, const ExcludedSet &excluded = {}) {
  detail::check_k(K, x.size(), excluded);
  auto order = detail::magnitude_order(x, excluded);
  order.resize(static_cast<std::size_t>(K));
  return order;
}

/// Sum of the K largest absolute values among penalized coordinates.
inline double top_k_norm(const Vector &x, Index K, const ExcludedSet &excluded = {}) {
  double s = 0.0;
  for (Index j : top_k_indices(x, K, excluded))
    s += std::abs(x[j]);
  return s;
}

inline double penalized_l1(const Vector &x, const ExcludedSet &excluded = {}) {
  double s = 0.0;
  for (Index j = 0; j < x.size(); ++j)
    if (!excluded.contains(j))
      s += std::abs(x[j]);
  return s;
}

/// T_K(x) = ||x||_1 - largest-K norm, over penalized coordinates. Zero iff at most
/// K penalized coordinates are nonzero.
inline double t_k_value(const Vector &x, Index K, const ExcludedSet &excluded = {}) {
  // Summing the tail directly keeps the result exactly zero on feasible points.
  detail::check_k(K, x.size(), excluded);
  const auto order = detail::magnitude_order(x, excluded);
  double s = 0.0;
  for (std::size_t k = static_cast<std::size_t>(K); k < order.size(); ++k)
    s += std::abs(x[order[k]]);
  return s;
}

inline double soft_threshold(double xi, double lambda) {
  if (xi >= lambda)
    return xi - lambda;
  if (xi <= -lambda)
    return xi + lambda;
  return 0.0;
}

/// argmin_x tau * T_K(x) + 1/2 ||x - y||^2: the K largest penalized entries of y are
/// kept, the other penalized entries are soft-thresholded by tau.
inline Vector prox_top_k_penalty(const Vector &y, double tau, Index K,
                                 const ExcludedSet &excluded = {}) {
  if (tau < 0.0)
    throw InvalidDataError("prox threshold must be nonnegative");
  const auto order = detail::magnitude_order(y, excluded);
  detail::check_k(K, y.size(), excluded);
  Vector x = y;
  for (std::size_t k = static_cast<std::size_t>(K); k < order.size(); ++k)
    x[order[k]] = soft_threshold(y[order[k]], tau);
  return x;
}

/// A subgradient v of the largest-K norm at x (unscaled). Under `canonical`, zero
/// coordinates picked into the top-K set get v_j = 0.
inline SignPattern top_k_sign_pattern(const Vector &x, Index K, const ExcludedSet &excluded,
                                      SubgradientPolicy policy) {
  SignPattern v{std::vector<std::int8_t>(static_cast<std::size_t>(x.size()), 0)};
  for (Index j : top_k_indices(x, K, excluded)) {
    auto &e = v.entries[static_cast<std::size_t>(j)];
    if (x[j] != 0.0) {
      e = x[j] > 0.0 ? 1 : -1;
      continue;
    }
    switch (policy) {
    case SubgradientPolicy::canonical:
      e = 0;
      break;
    case SubgradientPolicy::extreme_negative:
      e = -1;
      break;
    case SubgradientPolicy::index_order:
      e = 1;
      break;
    }
  }
  return v;
}

/// lambda * v with v from `top_k_sign_pattern`.
inline Vector subgradient_top_k(const Vector &x, Index K, const ExcludedSet &excluded,
                                SubgradientPolicy policy, double lambda = 1.0) {
  return lambda * top_k_sign_pattern(x, K, excluded, policy).to_vector();
}

/// Every sign pattern v with sum |v_j| = K over penalized coordinates and
/// <v, x> >= top_k_norm(x) - delta. Patterns are ordered lexicographically by
/// their index set, then by the signs. Throws ActiveSetOverflow beyond `cap`.
inline std::vector<SignPattern> active_set_enumerate(const Vector &x, Index K,
                                                     const ExcludedSet &excluded, double delta,
                                                     std::size_t cap) {
  if (delta < 0.0)
    throw InvalidDataError("delta must be nonnegative");
  if (cap < 1)
    throw RangeError("active-set cap must be at least 1");
  detail::check_k(K, x.size(), excluded);

  const auto order = detail::magnitude_order(x, excluded);
  const std::size_t n = order.size();
  const auto k_total = static_cast<std::size_t>(K);
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i)
    mag[i] = std::abs(x[order[i]]);

  struct Pick {
    Index index;
    std::int8_t sign;
  };
  std::vector<std::vector<Pick>> found;
  std::vector<Pick> chosen;
  chosen.reserve(k_total);

  // The k-th chosen coordinate (in magnitude order) is charged against the k-th
  // largest magnitude. Each charge is >= 0 and exactly 0 for tied magnitudes, so
  // delta = 0 admits precisely the maximizing patterns.
  auto recurse = [&](auto &&self, std::size_t start, double loss) -> void {
    const std::size_t k = chosen.size();
    if (k == k_total) {
      if (found.size() >= cap)
        throw ActiveSetOverflow(cap);
      found.emplace_back(chosen);
      return;
    }
    for (std::size_t i = start; i + (k_total - k) <= n; ++i) {
      const double charged = loss + (mag[k] - mag[i]);
      if (charged > delta)
        break; // magnitudes only decrease from here
      const Index j = order[i];
      if (mag[i] == 0.0) {
        for (std::int8_t s : {std::int8_t{-1}, std::int8_t{1}}) {
          chosen.push_back({j, s});
          self(self, i + 1, charged);
          chosen.pop_back();
        }
        continue;
      }
      const std::int8_t s = x[j] > 0.0 ? 1 : -1;
      chosen.push_back({j, s});
      self(self, i + 1, charged);
      chosen.pop_back();
      if (charged + 2.0 * mag[i] <= delta) {
        chosen.push_back({j, static_cast<std::int8_t>(-s)});
        self(self, i + 1, charged + 2.0 * mag[i]);
        chosen.pop_back();
      }
    }
  };
  recurse(recurse, 0, 0.0);

  for (auto &picks : found)
    std::sort(picks.begin(), picks.end(),
              [](const Pick &a, const Pick &b) { return a.index < b.index; });
  std::sort(found.begin(), found.end(), [](const auto &a, const auto &b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].index != b[i].index)
        return a[i].index < b[i].index;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].sign != b[i].sign)
        return a[i].sign < b[i].sign;
    return false;
  });

  std::vector<SignPattern> out;
  out.reserve(found.size());
  for (const auto &picks : found) {
    SignPattern v{std::vector<std::int8_t>(static_cast<std::size_t>(x.size()), 0)};
    for (const auto &pk : picks)
      v.entries[static_cast<std::size_t>(pk.index)] = pk.sign;
    out.push_back(std::move(v));
  }
  return out;
}

} // namespace exactpen
