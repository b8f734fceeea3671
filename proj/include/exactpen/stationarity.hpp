#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "exactpen/certificate.hpp"
#include "exactpen/objective.hpp"

namespace exactpen {

/// Largest coordinate violation of 0 in grad + lambda * d||.||_1(x) - lambda * v.
/// Excluded coordinates require grad_j = 0; zero coordinates accept any
/// |grad_j - lambda v_j| <= lambda.
template <DcPenalty Penalty>
double pattern_residual(const Vector &grad, const Vector &x, const Penalty &penalty,
                        const SignPattern &v) {
  const double lambda = penalty.lambda();
  double worst = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    const double vj = v.entries[static_cast<std::size_t>(j)];
    double r;
    if (!penalty.is_penalized(j))
      r = std::abs(grad[j]);
    else if (x[j] != 0.0)
      r = std::abs(grad[j] + lambda * (x[j] > 0.0 ? 1.0 : -1.0) - lambda * vj);
    else
      r = std::max(0.0, std::abs(grad[j] - lambda * vj) - lambda);
    worst = std::max(worst, r);
  }
  return worst;
}

struct PatternScan {
  Verdict verdict = Verdict::indeterminate;
  std::optional<SignPattern> pattern;
  double residual = 0.0;
  std::size_t active_set_size = 0;
  bool overflow = false;
};

namespace detail {

// Residuals over A_0(x); nullopt on overflow.
template <DcPenalty Penalty>
std::optional<std::pair<std::vector<SignPattern>, std::vector<double>>>
scan_active(const Vector &grad, const Vector &x, const Penalty &penalty, std::size_t cap) {
  std::vector<SignPattern> pieces;
  try {
    pieces = penalty.active_pieces(x, 0.0, cap);
  } catch (const ActiveSetOverflow &) {
    return std::nullopt;
  }
  std::vector<double> res(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i)
    res[i] = pattern_residual(grad, x, penalty, pieces[i]);
  return std::make_pair(std::move(pieces), std::move(res));
}

} // namespace detail

/// Critical iff SOME exactly-active piece satisfies the coordinate condition within tol.
/// The witness is the piece with the smallest residual (first in enumeration order on ties).
template <DcPenalty Penalty>
PatternScan check_critical_at(const Vector &grad, const Vector &x, const Penalty &penalty,
                              double tol, std::size_t cap = default_active_set_cap) {
  PatternScan out;
  auto scan = detail::scan_active(grad, x, penalty, cap);
  if (!scan) {
    out.overflow = true;
    return out;
  }
  auto &[pieces, res] = *scan;
  out.active_set_size = pieces.size();
  const auto best = std::min_element(res.begin(), res.end()) - res.begin();
  out.pattern = pieces[static_cast<std::size_t>(best)];
  out.residual = res[static_cast<std::size_t>(best)];
  out.verdict = out.residual <= tol ? Verdict::yes : Verdict::no;
  return out;
}

/// d-stationary iff EVERY exactly-active piece satisfies the coordinate condition within
/// tol. Reports the worst piece (first in enumeration order on ties).
template <DcPenalty Penalty>
PatternScan check_d_stationary_at(const Vector &grad, const Vector &x, const Penalty &penalty,
                                  double tol, std::size_t cap = default_active_set_cap) {
  PatternScan out;
  auto scan = detail::scan_active(grad, x, penalty, cap);
  if (!scan) {
    out.overflow = true;
    return out;
  }
  auto &[pieces, res] = *scan;
  out.active_set_size = pieces.size();
  const auto worst = std::max_element(res.begin(), res.end()) - res.begin();
  out.pattern = pieces[static_cast<std::size_t>(worst)];
  out.residual = res[static_cast<std::size_t>(worst)];
  out.verdict = out.residual <= tol ? Verdict::yes : Verdict::no;
  return out;
}

/// ||x - Prox_{g/eta}(x - grad/eta)|| with the deterministic prox tie-break.
template <ProxPenalty Penalty>
double prox_residual_at(const Vector &grad, const Vector &x, const Penalty &penalty, double eta) {
  if (!(eta > 0.0))
    throw InvalidDataError("eta must be positive");
  return (x - penalty.prox(x - grad / eta, 1.0 / eta)).norm();
}

template <SmoothLoss Loss, ProxPenalty Penalty>
double prox_residual(const CompositeObjective<Loss, Penalty> &obj, const Vector &x, double eta) {
  return prox_residual_at(obj.loss.value_grad(x).grad, x, obj.penalty, eta);
}

template <SmoothLoss Loss, DcPenalty Penalty>
PatternScan check_critical(const CompositeObjective<Loss, Penalty> &obj, const Vector &x,
                           double tol, std::size_t cap = default_active_set_cap) {
  return check_critical_at(obj.loss.value_grad(x).grad, x, obj.penalty, tol, cap);
}

template <SmoothLoss Loss, DcPenalty Penalty>
PatternScan check_d_stationary(const CompositeObjective<Loss, Penalty> &obj, const Vector &x,
                               double tol, std::size_t cap = default_active_set_cap) {
  return check_d_stationary_at(obj.loss.value_grad(x).grad, x, obj.penalty, tol, cap);
}

inline constexpr double default_certificate_tol = 1e-5;

template <DcPenalty Penalty>
StationarityReport classify_at(const Vector &grad, const Vector &x, const Penalty &penalty,
                               double tol, std::size_t cap, double eta) {
  StationarityReport rep;
  rep.tolerance = tol;
  rep.gradient_scale = grad.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0;
  rep.prox_eta = eta;
  rep.prox_residual = prox_residual_at(grad, x, penalty, eta);

  const PatternScan d = check_d_stationary_at(grad, x, penalty, tol, cap);
  if (d.overflow) {
    rep.overflow = true;
    rep.critical = Verdict::indeterminate;
    rep.d_stationary = Verdict::indeterminate;
    return rep;
  }
  const PatternScan crit = check_critical_at(grad, x, penalty, tol, cap);
  rep.active_set_size = d.active_set_size;
  rep.critical = crit.verdict;
  rep.critical_residual = crit.residual;
  if (crit.verdict == Verdict::yes)
    rep.critical_witness = crit.pattern;
  rep.d_stationary = d.verdict;
  rep.worst_pattern = d.pattern;
  rep.worst_residual = d.residual;
  return rep;
}

/// Full certificate. `eta` for the prox residual defaults to 1.1 L.
template <SmoothLoss Loss, DcPenalty Penalty>
StationarityReport classify(const CompositeObjective<Loss, Penalty> &obj, const Vector &x,
                            double tol = default_certificate_tol,
                            std::size_t cap = default_active_set_cap,
                            std::optional<double> eta = std::nullopt) {
  const Vector grad = obj.loss.value_grad(x).grad;
  return classify_at(grad, x, obj.penalty, tol, cap, eta.value_or(1.1 * obj.lipschitz));
}

/// Certificate for an l0-ball indicator block: with fewer than kappa nonzeros every
/// coordinate direction is feasible, so the whole gradient must vanish; at capacity
/// only the support coordinates are free.
inline StationarityReport classify_l0_block(const Vector &grad, const Vector &z,
                                            const IndicatorL0Ball &ball, double tol,
                                            double eta) {
  StationarityReport rep;
  rep.tolerance = tol;
  rep.gradient_scale = grad.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0;
  rep.prox_eta = eta;
  rep.prox_residual = prox_residual_at(grad, z, ball, eta);
  const Index nnz = (z.array() != 0.0).count();
  double worst = 0.0;
  for (Index j = 0; j < z.size(); ++j)
    if (nnz < ball.kappa() || z[j] != 0.0)
      worst = std::max(worst, std::abs(grad[j]));
  rep.worst_residual = rep.critical_residual = worst;
  rep.critical = rep.d_stationary = worst <= tol ? Verdict::yes : Verdict::no;
  rep.active_set_size = 1;
  return rep;
}

struct BlockReports {
  StationarityReport x;
  StationarityReport z;

  Verdict critical() const { return combine(x.critical, z.critical); }
  Verdict d_stationary() const { return combine(x.d_stationary, z.d_stationary); }

private:
  static Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::no || b == Verdict::no)
      return Verdict::no;
    if (a == Verdict::indeterminate || b == Verdict::indeterminate)
      return Verdict::indeterminate;
    return Verdict::yes;
  }
};

namespace detail {

template <class P>
StationarityReport classify_block(const Vector &grad, const Vector &v, const P &pen, double tol,
                                  std::size_t cap, double eta) {
  if constexpr (std::is_same_v<P, IndicatorL0Ball>)
    return classify_l0_block(grad, v, pen, tol, eta);
  else
    return classify_at(grad, v, pen, tol, cap, eta);
}

} // namespace detail

/// Blockwise certificate of (x, z): with a separable penalty, F'(x,z; dx,dz) >= 0 for
/// all directions iff each block is stationary for its own partial gradient.
template <ProxPenalty Px, ProxPenalty Pz>
BlockReports classify(const TwoBlockObjective<Px, Pz> &obj, const Vector &x, const Vector &z,
                      double tol = default_certificate_tol,
                      std::size_t cap = default_active_set_cap) {
  const auto vg = obj.loss.value_grad(x, z);
  return {detail::classify_block(vg.grad_x, x, obj.penalty_x, tol, cap, 1.1 * obj.lipschitz_x),
          detail::classify_block(vg.grad_z, z, obj.penalty_z, tol, cap, 1.1 * obj.lipschitz_z)};
}

} // namespace exactpen
