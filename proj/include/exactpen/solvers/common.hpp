#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "exactpen/certificate.hpp"
#include "exactpen/objective.hpp"

namespace exactpen {

enum class SolverKind { pgm, gist, pdca, pdcae, nepdca, palm, gpalm, pdcae_proj };

inline constexpr SolverKind all_solver_kinds[] = {
    SolverKind::pgm,    SolverKind::gist, SolverKind::pdca,  SolverKind::pdcae,
    SolverKind::nepdca, SolverKind::palm, SolverKind::gpalm, SolverKind::pdcae_proj};

constexpr std::string_view to_string(SolverKind k) {
  switch (k) {
  case SolverKind::pgm:
    return "pgm";
  case SolverKind::gist:
    return "gist";
  case SolverKind::pdca:
    return "pdca";
  case SolverKind::pdcae:
    return "pdcae";
  case SolverKind::nepdca:
    return "nepdca";
  case SolverKind::palm:
    return "palm";
  case SolverKind::gpalm:
    return "gpalm";
  case SolverKind::pdcae_proj:
    return "pdcae_proj";
  }
  return "?";
}

inline std::optional<SolverKind> parse_solver_kind(std::string_view name) {
  for (auto k : all_solver_kinds)
    if (to_string(k) == name)
      return k;
  if (name == "pdcae-proj")
    return SolverKind::pdcae_proj;
  return std::nullopt;
}

constexpr bool is_two_block(SolverKind k) {
  return k == SolverKind::palm || k == SolverKind::gpalm || k == SolverKind::pdcae_proj;
}

constexpr std::string_view to_string(SubgradientPolicy p) {
  switch (p) {
  case SubgradientPolicy::canonical:
    return "canonical";
  case SubgradientPolicy::extreme_negative:
    return "extreme_negative";
  case SubgradientPolicy::index_order:
    return "index_order";
  }
  return "?";
}

inline std::optional<SubgradientPolicy> parse_subgradient_policy(std::string_view name) {
  for (auto p : {SubgradientPolicy::canonical, SubgradientPolicy::extreme_negative,
                 SubgradientPolicy::index_order})
    if (to_string(p) == name)
      return p;
  return std::nullopt;
}

struct SolverConfig {
  long max_iters = 100000;
  double time_limit_sec = std::numeric_limits<double>::infinity();
  /// On ||x_{t+1} - x_t||, or ||dx|| + ||dz|| for two-block solvers.
  double stop_tol = 1e-8;

  // Barzilai-Borwein clipping window and first trial step.
  double eta_lower = 1e-8;
  double eta_upper = 1e8;
  double eta0 = 1.0;

  // Nonmonotone line search.
  double sigma = 1e-3;
  double sigma_x = 1e-3;
  double sigma_z = 1e-3;
  double rho = 2.0;
  double rho_x = 2.0;
  double rho_z = 2.0;
  int window = 4;
  int max_backtracks = 200;

  // Fixed-step multipliers: PGM uses eta = pgm_eta_factor * L, PALM uses
  // palm_eta_x_factor * lambda_max(A^T A) and palm_eta_z_factor * 1, the DC
  // methods use dc_step_factor * L.
  double pgm_eta_factor = 1.1;
  double palm_eta_x_factor = 1.1;
  double palm_eta_z_factor = 1.1;
  double dc_step_factor = 1.0;

  // Enhanced DC method.
  double delta = 1e-6;
  /// Proximal constant c in (0, L/2); negative selects 0.49 * min(L, 1).
  double c = -1.0;
  std::size_t active_set_cap = default_active_set_cap;

  SubgradientPolicy subgradient_policy = SubgradientPolicy::canonical;

  // Extrapolation schedule.
  bool extrapolate = true;
  int restart_period = 200;
  bool adaptive_restart = true;

  std::uint64_t seed = 0;

  void validate() const {
    if (!(eta_lower > 0.0 && eta_lower < eta_upper))
      throw InvalidDataError("need 0 < eta_lower < eta_upper");
    for (double r : {rho, rho_x, rho_z})
      if (!(r > 1.0))
        throw InvalidDataError("backtracking factors must exceed 1");
    for (double s : {sigma, sigma_x, sigma_z})
      if (!(s > 0.0 && s < 1.0))
        throw InvalidDataError("sufficient-decrease constants must lie in (0, 1)");
    if (window < 1)
      throw InvalidDataError("nonmonotone window must be at least 1");
    if (max_iters < 0)
      throw InvalidDataError("max_iters must be nonnegative");
    if (!(stop_tol >= 0.0))
      throw InvalidDataError("stop_tol must be nonnegative");
    if (!(delta >= 0.0))
      throw InvalidDataError("delta must be nonnegative");
    if (restart_period < 1)
      throw InvalidDataError("restart_period must be positive");
  }
};

/// Per-solver defaults: GIST r=4; GPALM r=6; NEPDCA r=5, delta=1e-6.
inline SolverConfig default_config(SolverKind kind) {
  SolverConfig cfg;
  switch (kind) {
  case SolverKind::gpalm:
    cfg.window = 6;
    break;
  case SolverKind::nepdca:
    cfg.window = 5;
    break;
  default:
    break;
  }
  return cfg;
}

enum class SolverStatus { converged, iter_limit, time_limit, active_set_overflow };

constexpr std::string_view to_string(SolverStatus s) {
  switch (s) {
  case SolverStatus::converged:
    return "converged";
  case SolverStatus::iter_limit:
    return "iter_limit";
  case SolverStatus::time_limit:
    return "time_limit";
  case SolverStatus::active_set_overflow:
    return "active_set_overflow";
  }
  return "?";
}

struct TraceRecord {
  long t = 0;
  double F = 0.0;
  double f = 0.0;
  double penalty = 0.0;
  /// ||x_t - x_{t-1}|| (plus ||z_t - z_{t-1}|| for two blocks); 0 on the first record.
  double displacement = 0.0;
  double eta = 0.0;
  double eta_z = 0.0;
  int backtracks = 0;
  std::size_t active_set_size = 0;
  double elapsed_sec = 0.0;
};

using IterateTrace = std::vector<TraceRecord>;

struct SolverResult {
  Vector x;
  Vector z;
  SolverStatus status = SolverStatus::iter_limit;
  IterateTrace trace;
  long iterations = 0;
  double wall_time_sec = 0.0;
  std::optional<StationarityReport> certificate;
  std::optional<StationarityReport> certificate_z;

  double final_objective() const { return trace.empty() ? 0.0 : trace.back().F; }
};

namespace detail {

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

/// Running window of the last r objective values.
class ObjectiveWindow {
public:
  explicit ObjectiveWindow(int r) : r_(static_cast<std::size_t>(r)) {}

  void push(double v) {
    values_.push_back(v);
    while (values_.size() > r_)
      values_.pop_front();
  }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

private:
  std::size_t r_;
  std::deque<double> values_;
};

inline void require_finite_objective(double F, std::string_view solver) {
  if (!std::isfinite(F))
    throw DivergenceError(std::string(solver) + ": objective became non-finite");
}

inline double clip_step(double eta, const SolverConfig &cfg) {
  if (std::isnan(eta))
    return cfg.eta_lower;
  return std::min(cfg.eta_upper, std::max(cfg.eta_lower, eta));
}

/// BB curvature <s, y>/||s||^2 clipped to [eta_lower, eta_upper]; falls back to
/// `previous` when s = 0.
inline double bb_step(const Vector &s, const Vector &y, double previous,
                      const SolverConfig &cfg) {
  const double ss = s.squaredNorm();
  if (ss == 0.0)
    return previous;
  return clip_step(s.dot(y) / ss, cfg);
}

/// Shared loop bookkeeping: trace, timing, stop rules.
class RunMonitor {
public:
  RunMonitor(const SolverConfig &cfg, SolverResult &result) : cfg_(cfg), result_(result) {
    cfg.validate();
  }

  void record(TraceRecord rec) {
    rec.elapsed_sec = clock_.seconds();
    result_.trace.push_back(rec);
  }

  /// Checked once per outer iteration before starting it.
  bool out_of_budget(long t) {
    if (t >= cfg_.max_iters) {
      result_.status = SolverStatus::iter_limit;
      return true;
    }
    if (clock_.seconds() > cfg_.time_limit_sec) {
      result_.status = SolverStatus::time_limit;
      return true;
    }
    return false;
  }

  bool converged(double displacement) {
    if (displacement <= cfg_.stop_tol) {
      result_.status = SolverStatus::converged;
      return true;
    }
    return false;
  }

  void finish(long iterations) {
    result_.iterations = iterations;
    result_.wall_time_sec = clock_.seconds();
  }

private:
  const SolverConfig &cfg_;
  SolverResult &result_;
  Stopwatch clock_;
};

} // namespace detail

} // namespace exactpen
