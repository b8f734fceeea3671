#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "exactpen/bench/config.hpp"
#include "exactpen/io/generators.hpp"
#include "exactpen/io/instance.hpp"
#include "exactpen/solvers/alternating.hpp"
#include "exactpen/solvers/dc.hpp"
#include "exactpen/solvers/proximal_gradient.hpp"
#include "exactpen/stationarity.hpp"

namespace exactpen::bench {

struct ReportRow {
  int repetition = 0;
  std::string instance;
  std::string solver;
  std::string status;
  long iterations = 0;
  double wall_time_sec = 0.0;
  double F = 0.0;
  double f = 0.0;
  double ln_F = 0.0;
  Index nnz_x = 0;
  std::optional<Index> nnz_z;
  Verdict critical = Verdict::indeterminate;
  Verdict d_stationary = Verdict::indeterminate;
  double prox_residual = 0.0;
  double stationarity_residual = 0.0;
  std::size_t active_set_size = 0;
};

struct SummaryRow {
  std::string solver;
  int runs = 0;
  int converged = 0;
  double mean_iterations = 0.0;
  double mean_wall_time_sec = 0.0;
  double mean_ln_F = 0.0;
  double mean_nnz_x = 0.0;
  std::optional<double> mean_nnz_z;
  int d_stationary = 0;
  bool best_iterations = false;
  bool best_ln_F = false;
  bool best_wall_time = false;
};

struct RunTrace {
  int repetition = 0;
  std::string solver;
  IterateTrace trace;
};

struct RunCertificate {
  int repetition = 0;
  std::string solver;
  StationarityReport x;
  std::optional<StationarityReport> z;
  /// Terminal point the certificate refers to.
  Vector point_x;
  Vector point_z;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<RunTrace> traces;
  std::vector<RunCertificate> certificates;
};

namespace detail {

inline Index count_nonzeros(const Vector &v) { return (v.array() != 0.0).count(); }

inline Vector uniform_start(Index n, double scale, std::uint64_t seed) {
  Rng rng(seed);
  return scale * rng.uniform_vector(n, -1.0, 1.0);
}

template <class Objective>
SolverResult run_single_block(SolverKind kind, const Objective &obj, const Vector &x0,
                              const SolverConfig &cfg) {
  switch (kind) {
  case SolverKind::pgm:
    return pgm_solve(obj, x0, cfg);
  case SolverKind::gist:
    return gist_solve(obj, x0, cfg);
  case SolverKind::pdca:
    return pdca_solve(obj, x0, cfg);
  case SolverKind::pdcae:
    return pdcae_solve(obj, x0, cfg);
  case SolverKind::nepdca:
    return nepdca_solve(obj, x0, cfg);
  default:
    throw std::invalid_argument("solver '" + std::string(to_string(kind)) +
                                "' needs a two-block problem");
  }
}

inline ReportRow make_row(int rep, const std::string &instance, SolverKind kind,
                          const SolverResult &res, double f, const StationarityReport &cert,
                          Verdict critical, Verdict d_stationary) {
  ReportRow row;
  row.repetition = rep;
  row.instance = instance;
  row.solver = std::string(to_string(kind));
  row.status = std::string(to_string(res.status));
  row.iterations = res.iterations;
  row.wall_time_sec = res.wall_time_sec;
  row.F = res.final_objective();
  row.f = f;
  row.ln_F = std::log(row.F);
  row.nnz_x = count_nonzeros(res.x);
  if (res.z.size() > 0)
    row.nnz_z = count_nonzeros(res.z);
  row.critical = critical;
  row.d_stationary = d_stationary;
  row.prox_residual = cert.prox_residual;
  row.stationarity_residual = cert.worst_residual;
  row.active_set_size = cert.active_set_size;
  return row;
}

template <class Loss, class Penalty>
void run_single_block_problem(const ExperimentConfig &exp, int rep, const std::string &instance,
                              const CompositeObjective<Loss, Penalty> &obj, const Vector &x0,
                              ExperimentReport &out) {
  for (SolverKind kind : exp.solvers) {
    const SolverConfig cfg = solver_config_for(exp, kind);
    SolverResult res = run_single_block(kind, obj, x0, cfg);
    // Recomputed here rather than trusted from the solver.
    const StationarityReport cert = classify(obj, res.x, exp.certificate_tol, cfg.active_set_cap);
    out.rows.push_back(make_row(rep, instance, kind, res, obj.loss.value(res.x), cert,
                                cert.critical, cert.d_stationary));
    out.certificates.push_back({rep, std::string(to_string(kind)), cert, std::nullopt, res.x, {}});
    out.traces.push_back({rep, std::string(to_string(kind)), std::move(res.trace)});
  }
}

inline void run_robust_problem(const ExperimentConfig &exp, int rep, std::uint64_t seed,
                               ExperimentReport &out) {
  const RobustInstance inst = gen_robust_instance({.p = exp.p,
                                                   .n = exp.n,
                                                   .k = exp.k,
                                                   .kappa = exp.kappa,
                                                   .outlier_magnitude = exp.outlier_magnitude,
                                                   .noise_sd = exp.effective_noise_sd(),
                                                   .seed = seed});
  const RobustLeastSquares loss(inst.A, inst.b);
  double lambda1 = exp.lambda;
  double lambda2 = exp.lambda2.value_or(exp.lambda);
  const LipschitzOptions lip_opts{};
  const double Lx = gram_lambda_max(inst.A, lip_opts).L;
  const double M = lipschitz_upper_bound(loss, lip_opts).L;
  if (exp.penalty_bound) {
    const auto vg = loss.value_grad(Vector::Zero(exp.p), Vector::Zero(exp.n));
    const auto bound = exact_penalty_bound({.grad_x_at_origin_norm = vg.grad_x.norm(),
                                            .grad_z_at_origin_norm = vg.grad_z.norm(),
                                            .M = M,
                                            .C_x = inst.x_true.norm(),
                                            .C_z = inst.z_true.norm(),
                                            .lambda1_floor = lambda1,
                                            .lambda2_floor = lambda2});
    lambda1 = bound.lambda1_min;
    lambda2 = bound.lambda2_min;
  }
  const std::string instance = "robust_p" + std::to_string(exp.p) + "_n" + std::to_string(exp.n) +
                               "_k" + std::to_string(exp.k) + "_kappa" +
                               std::to_string(exp.kappa) + "_s" + std::to_string(seed);
  const Vector x0 = uniform_start(exp.p, exp.effective_x0_scale(), Rng::derive(seed, 1));
  const Vector z0 = uniform_start(exp.n, exp.effective_x0_scale(), Rng::derive(seed, 2));

  const TwoBlockObjective pen_obj(loss, TopKPenalty(lambda1, exp.k, exp.p),
                                  TopKPenalty(lambda2, exp.kappa, exp.n), Lx, M);
  const TwoBlockObjective ball_obj(loss, TopKPenalty(lambda1, exp.k, exp.p),
                                   IndicatorL0Ball(exp.kappa), Lx, M);

  for (SolverKind kind : exp.solvers) {
    const SolverConfig cfg = solver_config_for(exp, kind);
    SolverResult res;
    BlockReports cert;
    if (kind == SolverKind::pdcae_proj) {
      res = pdcae_proj_solve(ball_obj, x0, z0, cfg);
      cert = classify(ball_obj, res.x, res.z, exp.certificate_tol, cfg.active_set_cap);
    } else {
      res = kind == SolverKind::palm ? palm_solve(pen_obj, x0, z0, cfg)
                                     : gpalm_solve(pen_obj, x0, z0, cfg);
      cert = classify(pen_obj, res.x, res.z, exp.certificate_tol, cfg.active_set_cap);
    }
    ReportRow row = make_row(rep, instance, kind, res, loss.value(res.x, res.z), cert.x,
                             cert.critical(), cert.d_stationary());
    row.prox_residual = std::hypot(cert.x.prox_residual, cert.z.prox_residual);
    row.stationarity_residual = std::max(cert.x.worst_residual, cert.z.worst_residual);
    out.rows.push_back(row);
    out.certificates.push_back({rep, std::string(to_string(kind)), cert.x, cert.z, res.x, res.z});
    out.traces.push_back({rep, std::string(to_string(kind)), std::move(res.trace)});
  }
}

// Means are compared after rounding to 5 decimals; ties are all flagged.
inline double report_round(double v) { return std::round(v * 1e5) / 1e5; }

inline void summarize(const ExperimentConfig &exp, ExperimentReport &rep) {
  for (SolverKind kind : exp.solvers) {
    SummaryRow s;
    s.solver = std::string(to_string(kind));
    double nnz_z = 0.0;
    bool has_z = false;
    for (const auto &row : rep.rows) {
      if (row.solver != s.solver)
        continue;
      ++s.runs;
      s.converged += row.status == "converged";
      s.d_stationary += row.d_stationary == Verdict::yes;
      s.mean_iterations += static_cast<double>(row.iterations);
      s.mean_wall_time_sec += row.wall_time_sec;
      s.mean_ln_F += row.ln_F;
      s.mean_nnz_x += static_cast<double>(row.nnz_x);
      if (row.nnz_z) {
        has_z = true;
        nnz_z += static_cast<double>(*row.nnz_z);
      }
    }
    if (s.runs > 0) {
      s.mean_iterations /= s.runs;
      s.mean_wall_time_sec /= s.runs;
      s.mean_ln_F /= s.runs;
      s.mean_nnz_x /= s.runs;
      if (has_z)
        s.mean_nnz_z = nnz_z / s.runs;
    }
    rep.summary.push_back(s);
  }
  auto flag_min = [&](auto get, bool SummaryRow::*flag) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &s : rep.summary)
      best = std::min(best, report_round(get(s)));
    for (auto &s : rep.summary)
      s.*flag = report_round(get(s)) == best;
  };
  flag_min([](const SummaryRow &s) { return s.mean_iterations; }, &SummaryRow::best_iterations);
  flag_min([](const SummaryRow &s) { return s.mean_ln_F; }, &SummaryRow::best_ln_F);
  flag_min([](const SummaryRow &s) { return s.mean_wall_time_sec; },
           &SummaryRow::best_wall_time);
}

} // namespace detail

/// Runs every solver on every repetition from a shared starting point, certifies
/// each terminal point and appends per-solver means.
inline ExperimentReport run_experiment(const ExperimentConfig &exp) {
  if (exp.solvers.empty())
    throw std::invalid_argument("experiment needs at least one solver");
  ExperimentReport report;

  std::optional<Instance> dataset;
  ExcludedSet excluded;
  if (exp.problem == ProblemKind::libsvm) {
    std::ifstream in(exp.dataset);
    if (!in)
      throw std::runtime_error("dataset file '" + exp.dataset + "' not found");
    dataset = parse_libsvm(in);
    dataset->meta.name = exp.dataset;
    if (exp.intercept) {
      auto [with_ones, ex] = add_intercept(*dataset);
      dataset = std::move(with_ones);
      excluded = ex;
    }
  }

  for (int rep = 0; rep < exp.repetitions; ++rep) {
    const std::uint64_t seed = Rng::derive(exp.seed, static_cast<std::uint64_t>(rep));
    switch (exp.problem) {
    case ProblemKind::fig1: {
      const auto obj = counterexample_objective();
      detail::run_single_block_problem(exp, rep, "fig1", obj, Vector::Constant(1, exp.x0),
                                       report);
      break;
    }
    case ProblemKind::sparse_ls: {
      SparseLsParams prm{.p = exp.p, .n = exp.n, .k = exp.k, .lambda = exp.lambda, .seed = seed};
      prm.noise_sd = exp.effective_noise_sd();
      const Instance inst = gen_sparse_ls_instance(prm);
      const CompositeObjective obj(LeastSquares(inst.A, inst.b),
                                   TopKPenalty(exp.lambda, exp.k, exp.p));
      const Vector x0 =
          perturbed_point(*inst.meta.planted, exp.effective_x0_scale(), Rng::derive(seed, 1));
      detail::run_single_block_problem(exp, rep, inst.meta.name, obj, x0, report);
      break;
    }
    case ProblemKind::libsvm: {
      const Index p = dataset->A.cols();
      const CompositeObjective obj(LeastSquares(dataset->A, dataset->b),
                                   TopKPenalty(exp.lambda, exp.k, p, excluded));
      const Vector x0 = detail::uniform_start(p, exp.effective_x0_scale(), Rng::derive(seed, 1));
      detail::run_single_block_problem(exp, rep, dataset->meta.name, obj, x0, report);
      break;
    }
    case ProblemKind::robust:
      detail::run_robust_problem(exp, rep, seed, report);
      break;
    }
  }
  detail::summarize(exp, report);
  return report;
}

} // namespace exactpen::bench
