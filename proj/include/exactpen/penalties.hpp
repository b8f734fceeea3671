#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "exactpen/top_k.hpp"

namespace exactpen {

/// Anything with a value and a proximal map prox(y, s) = argmin_x s*g(x) + 1/2||x - y||^2.
template <class P>
concept ProxPenalty = requires(const P &pen, const Vector &x, double step) {
  { pen.value(x) } -> std::convertible_to<double>;
  { pen.prox(x, step) } -> std::convertible_to<Vector>;
};

/// g = g1 - g2 with g1 = lambda * ||x||_1 over penalized coordinates and
/// g2 = lambda * max_i <v_i, x> a polyhedral convex function whose pieces can be enumerated.
template <class P>
concept DcPenalty = ProxPenalty<P> && requires(const P &pen, const Vector &x, double step,
                                              SubgradientPolicy policy, std::size_t cap, Index j) {
  { pen.lambda() } -> std::convertible_to<double>;
  { pen.g1(x) } -> std::convertible_to<double>;
  { pen.g2(x) } -> std::convertible_to<double>;
  { pen.prox_g1(x, step) } -> std::convertible_to<Vector>;
  { pen.subgradient_g2(x, policy) } -> std::convertible_to<Vector>;
  { pen.active_pieces(x, step, cap) } -> std::convertible_to<std::vector<SignPattern>>;
  { pen.is_penalized(j) } -> std::convertible_to<bool>;
};

inline constexpr std::size_t default_active_set_cap = 100000;

namespace detail {

inline Vector soft_threshold_masked(const Vector &y, double tau, const ExcludedSet &excluded) {
  Vector x = y;
  for (Index j = 0; j < y.size(); ++j)
    if (!excluded.contains(j))
      x[j] = soft_threshold(y[j], tau);
  return x;
}

} // namespace detail

/// lambda * T_K(x) over the non-excluded coordinates.
class TopKPenalty {
public:
  TopKPenalty(double lambda, Index K, Index p, ExcludedSet excluded = {})
      : lambda_(lambda), K_(K), p_(p), excluded_(std::move(excluded)) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw InvalidDataError("penalty weight must be finite and nonnegative");
    (void)excluded_.penalized_mask(p);
    detail::check_k(K, p, excluded_);
  }

  double lambda() const { return lambda_; }
  Index k() const { return K_; }
  Index dim() const { return p_; }
  const ExcludedSet &excluded() const { return excluded_; }
  bool is_penalized(Index j) const { return !excluded_.contains(j); }

  double value(const Vector &x) const {
    return lambda_ == 0.0 ? 0.0 : lambda_ * t_k_value(x, K_, excluded_);
  }
  double g1(const Vector &x) const { return lambda_ * penalized_l1(x, excluded_); }
  double g2(const Vector &x) const { return lambda_ * top_k_norm(x, K_, excluded_); }

  Vector prox(const Vector &y, double step) const {
    return prox_top_k_penalty(y, step * lambda_, K_, excluded_);
  }
  Vector prox_g1(const Vector &y, double step) const {
    return detail::soft_threshold_masked(y, step * lambda_, excluded_);
  }
  Vector subgradient_g2(const Vector &x, SubgradientPolicy policy) const {
    return subgradient_top_k(x, K_, excluded_, policy, lambda_);
  }
  std::vector<SignPattern> active_pieces(const Vector &x, double delta,
                                         std::size_t cap = default_active_set_cap) const {
    return active_set_enumerate(x, K_, excluded_, delta, cap);
  }

private:
  double lambda_;
  Index K_;
  Index p_;
  ExcludedSet excluded_;
};

/// g(x) = lambda * (||x||_1 - max_i <v_i, x>) with an explicit list of pieces v_i.
/// Small worked examples (a one-dimensional max{0, -x}, say) use this form.
class PiecewiseLinearPenalty {
public:
  PiecewiseLinearPenalty(double lambda, std::vector<SignPattern> pieces)
      : lambda_(lambda), pieces_(std::move(pieces)) {
    if (pieces_.empty())
      throw InvalidDataError("at least one linear piece is required");
    for (const auto &v : pieces_)
      if (v.size() != pieces_.front().size())
        throw SizingError("linear pieces differ in dimension");
  }

  double lambda() const { return lambda_; }
  Index dim() const { return pieces_.front().size(); }
  const std::vector<SignPattern> &pieces() const { return pieces_; }
  bool is_penalized(Index) const { return true; }

  double g1(const Vector &x) const { return lambda_ * x.lpNorm<1>(); }
  double g2(const Vector &x) const { return lambda_ * max_piece(x); }
  double value(const Vector &x) const { return g1(x) - g2(x); }

  /// g = min_i (g1 - lambda <v_i, .>), so its prox is the best of the per-piece proxes.
  Vector prox(const Vector &y, double step) const {
    const double tau = step * lambda_;
    Vector best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (const auto &v : pieces_) {
      const Vector cand = detail::soft_threshold_masked(y + tau * v.to_vector(), tau, {});
      const double obj = step * value(cand) + 0.5 * (cand - y).squaredNorm();
      if (obj < best_obj) {
        best_obj = obj;
        best = cand;
      }
    }
    return best;
  }
  Vector prox_g1(const Vector &y, double step) const {
    return detail::soft_threshold_masked(y, step * lambda_, {});
  }

  Vector subgradient_g2(const Vector &x, SubgradientPolicy policy) const {
    const auto active = active_pieces(x, 0.0, pieces_.size());
    auto score = [&](const SignPattern &v) -> long {
      long s = 0;
      for (auto e : v.entries)
        s += policy == SubgradientPolicy::canonical ? std::abs(e) : e;
      return s;
    };
    const SignPattern *pick = &active.front();
    if (policy != SubgradientPolicy::index_order)
      for (const auto &v : active)
        if (score(v) < score(*pick))
          pick = &v;
    return lambda_ * pick->to_vector();
  }

  std::vector<SignPattern> active_pieces(const Vector &x, double delta,
                                         std::size_t cap = default_active_set_cap) const {
    const double top = max_piece(x);
    std::vector<SignPattern> out;
    for (const auto &v : pieces_) {
      if (v.dot(x) >= top - delta) {
        if (out.size() >= cap)
          throw ActiveSetOverflow(cap);
        out.push_back(v);
      }
    }
    return out;
  }

private:
  double max_piece(const Vector &x) const {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto &v : pieces_)
      top = std::max(top, v.dot(x));
    return top;
  }

  double lambda_;
  std::vector<SignPattern> pieces_;
};

/// Keeps the kappa largest-magnitude entries (ties to the lower index), zeroes the rest.
inline Vector project_l0_ball(const Vector &z, Index kappa) {
  if (kappa < 0 || kappa > z.size())
    throw RangeError("kappa = " + std::to_string(kappa) + " outside [0, " +
                     std::to_string(z.size()) + "]");
  const auto order = detail::magnitude_order(z, {});
  Vector out = Vector::Zero(z.size());
  for (Index k = 0; k < kappa; ++k)
    out[order[static_cast<std::size_t>(k)]] = z[order[static_cast<std::size_t>(k)]];
  return out;
}

/// Indicator of {z : ||z||_0 <= kappa}.
class IndicatorL0Ball {
public:
  explicit IndicatorL0Ball(Index kappa) : kappa_(kappa) {
    if (kappa < 0)
      throw RangeError("kappa must be nonnegative");
  }

  Index kappa() const { return kappa_; }

  double value(const Vector &z) const {
    const Index nnz = (z.array() != 0.0).count();
    return nnz <= kappa_ ? 0.0 : std::numeric_limits<double>::infinity();
  }
  Vector prox(const Vector &y, double) const { return project_l0_ball(y, kappa_); }

private:
  Index kappa_;
};

static_assert(DcPenalty<TopKPenalty>);
static_assert(DcPenalty<PiecewiseLinearPenalty>);
static_assert(ProxPenalty<IndicatorL0Ball>);

struct ExactPenaltyBoundInputs {
  double grad_x_at_origin_norm = 0.0;
  double grad_z_at_origin_norm = 0.0;
  double M = 0.0;
  double C_x = 0.0;
  double C_z = 0.0;
  double lambda1_floor = 0.0;
  double lambda2_floor = 0.0;
  double margin = 1e-6;
};

/// Penalty weights above which the two-block penalized robust regression shares its
/// global minimizers with the l0-constrained problem. Only valid when the caller's
/// C_x, C_z bound the solution set at the floor weights; that premise is not checked.
struct ExactPenaltyBound {
  double lambda1_min = 0.0;
  double lambda2_min = 0.0;
  ExactPenaltyBoundInputs inputs;
};

inline ExactPenaltyBound exact_penalty_bound(const ExactPenaltyBoundInputs &in) {
  auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
  if (!nonneg(in.grad_x_at_origin_norm) || !nonneg(in.grad_z_at_origin_norm) || !nonneg(in.M) ||
      !nonneg(in.C_x) || !nonneg(in.C_z) || !nonneg(in.lambda1_floor) ||
      !nonneg(in.lambda2_floor) || !nonneg(in.margin))
    throw InvalidDataError("exact penalty bound inputs must be finite and nonnegative");
  ExactPenaltyBound out;
  out.inputs = in;
  const double t1 = in.grad_x_at_origin_norm + in.M * (1.5 * in.C_x + in.C_z);
  const double t2 = in.grad_z_at_origin_norm + in.M * (in.C_x + 1.5 * in.C_z);
  out.lambda1_min = (1.0 + in.margin) * std::max(t1, in.lambda1_floor);
  out.lambda2_min = (1.0 + in.margin) * std::max(t2, in.lambda2_floor);
  return out;
}

} // namespace exactpen
