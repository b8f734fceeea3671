#pragma once

#include "exactpen/solvers/common.hpp"

namespace exactpen {

/// Proximal gradient with the fixed step parameter eta = pgm_eta_factor * L.
template <SmoothLoss Loss, ProxPenalty Penalty>
SolverResult pgm_solve(const CompositeObjective<Loss, Penalty> &obj, const Vector &x0,
                       const SolverConfig &cfg) {
  SolverResult result;
  detail::RunMonitor monitor(cfg, result);
  const double eta = cfg.pgm_eta_factor * obj.lipschitz;

  Vector x = x0;
  ValueGrad vg = obj.loss.value_grad(x);
  double pen = obj.penalty.value(x);
  monitor.record({.t = 0, .F = vg.value + pen, .f = vg.value, .penalty = pen, .eta = eta});

  long t = 0;
  while (!monitor.out_of_budget(t)) {
    Vector next = obj.penalty.prox(x - vg.grad / eta, 1.0 / eta);
    ValueGrad vg_next = obj.loss.value_grad(next);
    const double pen_next = obj.penalty.value(next);
    const double F_next = vg_next.value + pen_next;
    detail::require_finite_objective(F_next, "pgm");
    const double disp = (next - x).norm();

    x = std::move(next);
    vg = std::move(vg_next);
    ++t;
    monitor.record({.t = t,
                    .F = F_next,
                    .f = vg.value,
                    .penalty = pen_next,
                    .displacement = disp,
                    .eta = eta});
    if (monitor.converged(disp))
      break;
  }
  monitor.finish(t);
  result.x = std::move(x);
  return result;
}

/// GIST: proximal gradient with a Barzilai-Borwein trial step and a nonmonotone
/// backtracking line search over the last `cfg.window` objective values.
template <SmoothLoss Loss, ProxPenalty Penalty>
SolverResult gist_solve(const CompositeObjective<Loss, Penalty> &obj, const Vector &x0,
                        const SolverConfig &cfg) {
  SolverResult result;
  detail::RunMonitor monitor(cfg, result);

  Vector x = x0;
  ValueGrad vg = obj.loss.value_grad(x);
  double pen = obj.penalty.value(x);
  double F = vg.value + pen;
  monitor.record({.t = 0, .F = F, .f = vg.value, .penalty = pen, .eta = cfg.eta0});

  detail::ObjectiveWindow window(cfg.window);
  window.push(F);
  double eta_trial = cfg.eta0;

  long t = 0;
  while (!monitor.out_of_budget(t)) {
    double eta = eta_trial;
    int backtracks = 0;
    Vector next;
    double f_next = 0.0;
    double pen_next = 0.0;
    for (;;) {
      next = obj.penalty.prox(x - vg.grad / eta, 1.0 / eta);
      f_next = obj.loss.value(next);
      pen_next = obj.penalty.value(next);
      const double accept_level =
          window.max() - 0.5 * cfg.sigma * eta * (next - x).squaredNorm();
      if (f_next + pen_next <= accept_level)
        break;
      if (++backtracks > cfg.max_backtracks)
        throw LineSearchError("gist: no acceptable step after " +
                              std::to_string(cfg.max_backtracks) + " backtracks");
      eta *= cfg.rho;
    }
    F = f_next + pen_next;
    detail::require_finite_objective(F, "gist");

    ValueGrad vg_next = obj.loss.value_grad(next);
    const Vector s = next - x;
    eta_trial = detail::bb_step(s, vg_next.grad - vg.grad, eta, cfg);
    const double disp = s.norm();

    x = std::move(next);
    vg = std::move(vg_next);
    window.push(F);
    ++t;
    monitor.record({.t = t,
                    .F = F,
                    .f = vg.value,
                    .penalty = pen_next,
                    .displacement = disp,
                    .eta = eta,
                    .backtracks = backtracks});
    if (monitor.converged(disp))
      break;
  }
  monitor.finish(t);
  result.x = std::move(x);
  return result;
}

} // namespace exactpen
