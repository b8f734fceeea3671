#pragma once

#include <limits>

#include "exactpen/solvers/common.hpp"

namespace exactpen {

namespace detail {

/// Accelerated-gradient momentum with fixed and adaptive restarts.
class ExtrapolationSchedule {
public:
  ExtrapolationSchedule(bool enabled, int period, bool adaptive)
      : enabled_(enabled), period_(period), adaptive_(adaptive) {}

  double beta() const { return enabled_ ? (theta_prev_ - 1.0) / theta_ : 0.0; }

  /// Advance after iteration t (0-based) produced objective F_next from F.
  void advance(long t, double F, double F_next) {
    theta_prev_ = theta_;
    theta_ = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_ * theta_));
    if ((t + 1) % period_ == 0 || (adaptive_ && F_next > F))
      theta_prev_ = theta_ = 1.0;
  }

private:
  bool enabled_;
  int period_;
  bool adaptive_;
  double theta_prev_ = 1.0;
  double theta_ = 1.0;
};

template <SmoothLoss Loss, DcPenalty Penalty>
SolverResult pdca_family(const CompositeObjective<Loss, Penalty> &obj, const Vector &x0,
                         const SolverConfig &cfg, bool extrapolate, std::string_view name) {
  SolverResult result;
  RunMonitor monitor(cfg, result);
  const double L = cfg.dc_step_factor * obj.lipschitz;

  Vector x = x0;
  Vector x_prev = x0;
  ValueGrad vg = obj.loss.value_grad(x);
  double pen = obj.penalty.value(x);
  double F = vg.value + pen;
  monitor.record({.t = 0, .F = F, .f = vg.value, .penalty = pen, .eta = L});

  ExtrapolationSchedule schedule(extrapolate, cfg.restart_period, cfg.adaptive_restart);
  long t = 0;
  while (!monitor.out_of_budget(t)) {
    const double beta = schedule.beta();
    const Vector xi = obj.penalty.subgradient_g2(x, cfg.subgradient_policy);
    Vector next;
    if (beta == 0.0) {
      next = obj.penalty.prox_g1(x - (vg.grad - xi) / L, 1.0 / L);
    } else {
      const Vector y = x + beta * (x - x_prev);
      const Vector gy = obj.loss.value_grad(y).grad;
      next = obj.penalty.prox_g1(y - (gy - xi) / L, 1.0 / L);
    }
    ValueGrad vg_next = obj.loss.value_grad(next);
    const double pen_next = obj.penalty.value(next);
    const double F_next = vg_next.value + pen_next;
    require_finite_objective(F_next, name);
    const double disp = (next - x).norm();

    schedule.advance(t, F, F_next);
    x_prev = std::move(x);
    x = std::move(next);
    vg = std::move(vg_next);
    F = F_next;
    ++t;
    monitor.record(
        {.t = t, .F = F, .f = vg.value, .penalty = pen_next, .displacement = disp, .eta = L});
    if (monitor.converged(disp))
      break;
  }
  monitor.finish(t);
  result.x = std::move(x);
  return result;
}

} // namespace detail

/// Proximal DC algorithm: linearize g2 at x_t with a subgradient picked by
/// `cfg.subgradient_policy`, then soft-threshold with step 1/L.
template <SmoothLoss Loss, DcPenalty Penalty>
SolverResult pdca_solve(const CompositeObjective<Loss, Penalty> &obj, const Vector &x0,
                        const SolverConfig &cfg) {
  return detail::pdca_family(obj, x0, cfg, false, "pdca");
}

/// PDCA with extrapolation y_t = x_t + beta_t (x_t - x_{t-1}); beta_t follows the
/// accelerated-gradient theta recursion, reset every `restart_period` iterations
/// and whenever F increases. `cfg.extrapolate = false` reproduces PDCA.
template <SmoothLoss Loss, DcPenalty Penalty>
SolverResult pdcae_solve(const CompositeObjective<Loss, Penalty> &obj, const Vector &x0,
                         const SolverConfig &cfg) {
  return detail::pdca_family(obj, x0, cfg, cfg.extrapolate, "pdcae");
}

/// Deterministic nonmonotone enhanced PDCA.
///
/// Each iteration takes one proximal DC step per piece of the relaxed active set
/// A_delta(x_t), keeps the candidate minimizing F + c/2 ||. - x_t||^2, and accepts
/// it once the acceptance inequality holds against every piece; otherwise eta is
/// multiplied by rho and all candidates are recomputed.
template <SmoothLoss Loss, DcPenalty Penalty>
SolverResult nepdca_solve(const CompositeObjective<Loss, Penalty> &obj, const Vector &x0,
                          const SolverConfig &cfg) {
  SolverResult result;
  detail::RunMonitor monitor(cfg, result);
  const double lambda = obj.penalty.lambda();
  const double c = cfg.c > 0.0 ? cfg.c : 0.49 * std::min(obj.lipschitz, 1.0);

  Vector x = x0;
  ValueGrad vg = obj.loss.value_grad(x);
  double pen = obj.penalty.value(x);
  double F = vg.value + pen;
  monitor.record({.t = 0, .F = F, .f = vg.value, .penalty = pen, .eta = cfg.eta0});

  // Window over F(x_j) for max(t - r, 0) <= j <= t.
  detail::ObjectiveWindow window(cfg.window + 1);
  window.push(F);
  double eta_trial = cfg.eta0;

  long t = 0;
  while (!monitor.out_of_budget(t)) {
    std::vector<SignPattern> pieces;
    try {
      pieces = obj.penalty.active_pieces(x, cfg.delta, cfg.active_set_cap);
    } catch (const ActiveSetOverflow &) {
      result.status = SolverStatus::active_set_overflow;
      break;
    }

    const double base = vg.value + obj.penalty.g1(x);
    std::vector<double> piece_level(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i)
      piece_level[i] = base - lambda * pieces[i].dot(x);

    double eta = eta_trial;
    int backtracks = 0;
    Vector best;
    double best_F = 0.0;
    double best_f = 0.0;
    double best_pen = 0.0;
    for (;;) {
      std::vector<double> moves(pieces.size());
      double best_score = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        const Vector cand = obj.penalty.prox_g1(
            x - (vg.grad - lambda * pieces[i].to_vector()) / eta, 1.0 / eta);
        const double f_c = obj.loss.value(cand);
        const double pen_c = obj.penalty.value(cand);
        moves[i] = (cand - x).squaredNorm();
        const double score = f_c + pen_c + 0.5 * c * moves[i];
        if (score < best_score) {
          best_score = score;
          best = cand;
          best_f = f_c;
          best_pen = pen_c;
          best_F = f_c + pen_c;
        }
      }
      const double best_move = (best - x).squaredNorm();
      const double recent = window.max();
      bool accepted = true;
      for (std::size_t i = 0; i < pieces.size() && accepted; ++i)
        accepted = best_F <= std::max(piece_level[i], recent) - 0.5 * c * best_move -
                                 0.5 * c * moves[i];
      if (accepted)
        break;
      if (++backtracks > cfg.max_backtracks)
        throw LineSearchError("nepdca: no acceptable step after " +
                              std::to_string(cfg.max_backtracks) + " backtracks");
      eta *= cfg.rho;
    }
    detail::require_finite_objective(best_F, "nepdca");

    ValueGrad vg_next = obj.loss.value_grad(best);
    const Vector s = best - x;
    eta_trial = detail::bb_step(s, vg_next.grad - vg.grad, eta, cfg);
    const double disp = s.norm();

    x = std::move(best);
    vg = std::move(vg_next);
    F = best_F;
    window.push(F);
    ++t;
    monitor.record({.t = t,
                    .F = F,
                    .f = best_f,
                    .penalty = best_pen,
                    .displacement = disp,
                    .eta = eta,
                    .backtracks = backtracks,
                    .active_set_size = pieces.size()});
    if (monitor.converged(disp))
      break;
  }
  monitor.finish(t);
  result.x = std::move(x);
  return result;
}

} // namespace exactpen
