#pragma once

#include "exactpen/solvers/dc.hpp"

namespace exactpen {

/// PALM: one proximal gradient step on x, then one on z at the updated x, with
/// fixed steps eta_x = palm_eta_x_factor * lambda_max(A^T A) and
/// eta_z = palm_eta_z_factor * 1.
template <ProxPenalty Px, ProxPenalty Pz>
SolverResult palm_solve(const TwoBlockObjective<Px, Pz> &obj, const Vector &x0, const Vector &z0,
                        const SolverConfig &cfg) {
  SolverResult result;
  detail::RunMonitor monitor(cfg, result);
  const double eta_x = cfg.palm_eta_x_factor * obj.lipschitz_x;
  const double eta_z = cfg.palm_eta_z_factor * obj.lipschitz_z;

  Vector x = x0;
  Vector z = z0;
  double f = obj.loss.value(x, z);
  double pen = obj.penalty_x.value(x) + obj.penalty_z.value(z);
  monitor.record({.t = 0, .F = f + pen, .f = f, .penalty = pen, .eta = eta_x, .eta_z = eta_z});

  long t = 0;
  while (!monitor.out_of_budget(t)) {
    Vector x_next = obj.penalty_x.prox(x - obj.loss.grad_x(x, z) / eta_x, 1.0 / eta_x);
    Vector z_next = obj.penalty_z.prox(z - obj.loss.grad_z(x_next, z) / eta_z, 1.0 / eta_z);
    f = obj.loss.value(x_next, z_next);
    pen = obj.penalty_x.value(x_next) + obj.penalty_z.value(z_next);
    detail::require_finite_objective(f + pen, "palm");
    const double disp = (x_next - x).norm() + (z_next - z).norm();

    x = std::move(x_next);
    z = std::move(z_next);
    ++t;
    monitor.record({.t = t,
                    .F = f + pen,
                    .f = f,
                    .penalty = pen,
                    .displacement = disp,
                    .eta = eta_x,
                    .eta_z = eta_z});
    if (monitor.converged(disp))
      break;
  }
  monitor.finish(t);
  result.x = std::move(x);
  result.z = std::move(z);
  return result;
}

/// GPALM: PALM with per-block Barzilai-Borwein trial steps and a two-block
/// nonmonotone line search over the last `cfg.window` objective values.
template <ProxPenalty Px, ProxPenalty Pz>
SolverResult gpalm_solve(const TwoBlockObjective<Px, Pz> &obj, const Vector &x0, const Vector &z0,
                         const SolverConfig &cfg) {
  SolverResult result;
  detail::RunMonitor monitor(cfg, result);

  Vector x = x0;
  Vector z = z0;
  double f = obj.loss.value(x, z);
  double pen = obj.penalty_x.value(x) + obj.penalty_z.value(z);
  double F = f + pen;
  monitor.record({.t = 0, .F = F, .f = f, .penalty = pen, .eta = cfg.eta0, .eta_z = cfg.eta0});

  detail::ObjectiveWindow window(cfg.window);
  window.push(F);
  double trial_x = cfg.eta0;
  double trial_z = cfg.eta0;

  long t = 0;
  while (!monitor.out_of_budget(t)) {
    const Vector gx = obj.loss.grad_x(x, z);
    double eta_x = trial_x;
    double eta_z = trial_z;
    int backtracks = 0;
    Vector x_next, z_next, gz_mid;
    for (;;) {
      x_next = obj.penalty_x.prox(x - gx / eta_x, 1.0 / eta_x);
      gz_mid = obj.loss.grad_z(x_next, z);
      z_next = obj.penalty_z.prox(z - gz_mid / eta_z, 1.0 / eta_z);
      f = obj.loss.value(x_next, z_next);
      pen = obj.penalty_x.value(x_next) + obj.penalty_z.value(z_next);
      const double level = window.max() -
                           0.5 * cfg.sigma_x * eta_x * (x_next - x).squaredNorm() -
                           0.5 * cfg.sigma_z * eta_z * (z_next - z).squaredNorm();
      if (f + pen <= level)
        break;
      if (++backtracks > cfg.max_backtracks)
        throw LineSearchError("gpalm: no acceptable step after " +
                              std::to_string(cfg.max_backtracks) + " backtracks");
      eta_x *= cfg.rho_x;
      eta_z *= cfg.rho_z;
    }
    F = f + pen;
    detail::require_finite_objective(F, "gpalm");

    const auto vg = obj.loss.value_grad(x_next, z_next);
    const Vector sx = x_next - x;
    const Vector sz = z_next - z;
    trial_x = detail::bb_step(sx, vg.grad_x - gx, eta_x, cfg);
    trial_z = detail::bb_step(sz, vg.grad_z - gz_mid, eta_z, cfg);
    const double disp = sx.norm() + sz.norm();

    x = std::move(x_next);
    z = std::move(z_next);
    window.push(F);
    ++t;
    monitor.record({.t = t,
                    .F = F,
                    .f = f,
                    .penalty = pen,
                    .displacement = disp,
                    .eta = eta_x,
                    .eta_z = eta_z,
                    .backtracks = backtracks});
    if (monitor.converged(disp))
      break;
  }
  monitor.finish(t);
  result.x = std::move(x);
  result.z = std::move(z);
  return result;
}

/// Alternating PDCAe-on-x / projection-on-z scheme for
/// 1/2||Ax - b - z||^2 + lambda T_K(x) subject to ||z||_0 <= kappa.
/// The z-update is the exact minimizer over the l0 ball: project(Ax - b, kappa).
/// z0 is projected onto the ball before the first iteration.
template <DcPenalty Px>
SolverResult pdcae_proj_solve(const TwoBlockObjective<Px, IndicatorL0Ball> &obj,
                              const Vector &x0, const Vector &z0, const SolverConfig &cfg) {
  SolverResult result;
  detail::RunMonitor monitor(cfg, result);
  const double L = cfg.dc_step_factor * obj.lipschitz_x;
  const Index kappa = obj.penalty_z.kappa();
  const DesignMatrix &A = obj.loss.design();
  const Vector &b = obj.loss.response();

  Vector x = x0;
  Vector x_prev = x0;
  Vector z = project_l0_ball(z0, kappa);
  double f = obj.loss.value(x, z);
  double pen = obj.penalty_x.value(x);
  double F = f + pen;
  monitor.record({.t = 0, .F = F, .f = f, .penalty = pen, .eta = L});

  detail::ExtrapolationSchedule schedule(cfg.extrapolate, cfg.restart_period,
                                         cfg.adaptive_restart);
  long t = 0;
  while (!monitor.out_of_budget(t)) {
    const double beta = schedule.beta();
    const Vector y = x + beta * (x - x_prev);
    const Vector xi = obj.penalty_x.subgradient_g2(x, cfg.subgradient_policy);
    Vector x_next = obj.penalty_x.prox_g1(y - (obj.loss.grad_x(y, z) - xi) / L, 1.0 / L);
    Vector z_next = project_l0_ball(A.apply(x_next) - b, kappa);

    f = obj.loss.value(x_next, z_next);
    pen = obj.penalty_x.value(x_next);
    const double F_next = f + pen;
    detail::require_finite_objective(F_next, "pdcae_proj");
    const double disp = (x_next - x).norm() + (z_next - z).norm();

    schedule.advance(t, F, F_next);
    x_prev = std::move(x);
    x = std::move(x_next);
    z = std::move(z_next);
    F = F_next;
    ++t;
    monitor.record({.t = t, .F = F, .f = f, .penalty = pen, .displacement = disp, .eta = L});
    if (monitor.converged(disp))
      break;
  }
  monitor.finish(t);
  result.x = std::move(x);
  result.z = std::move(z);
  return result;
}

} // namespace exactpen
