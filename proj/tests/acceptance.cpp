// Acceptance suite. Run without arguments for every criterion, or with one
// name (AC1 ... AC9). Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "exactpen/exactpen.hpp"
#include "exactpen/io/generators.hpp"
#include "exactpen/testing/oracles.hpp"

using namespace exactpen;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      if (!detail.empty())
        detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Index nnz(const Vector &v) { return (v.array() != 0.0).count(); }

Eigen::MatrixXd gaussian(Index n, Index p, Rng &rng) {
  Eigen::MatrixXd A(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j)
      A(i, j) = rng.normal();
  return A;
}

Vector gaussian_vector(Index n, Rng &rng, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = scale * rng.normal();
  return v;
}

// Small integers make exact ties among magnitudes likely.
Vector tie_heavy(Index n, Rng &rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = static_cast<double>(static_cast<int>(rng.below(5)) - 2);
  return v;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

// ---------------------------------------------------------------------------

Outcome ac1() {
  Outcome out;
  const auto obj = counterexample_objective();

  const auto at0 = classify(obj, scalar(0), 1e-8);
  const auto at1 = classify(obj, scalar(1), 1e-8);
  out.require(at0.critical == Verdict::yes && at0.d_stationary == Verdict::no,
              "(a) x=0 should be critical and not d-stationary");
  out.require(at1.d_stationary == Verdict::yes, "(a) x=1 should be d-stationary");

  const auto gist = gist_solve(obj, scalar(0), default_config(SolverKind::gist));
  const auto pgm = pgm_solve(obj, scalar(0), default_config(SolverKind::pgm));
  for (const auto *r : {&gist, &pgm}) {
    const char *name = r == &gist ? "gist" : "pgm";
    out.require(std::abs(r->x[0] - 1.0) <= 1e-6,
                fmt("(b) %s ended at x=%.10g", name, r->x[0]));
    out.require(std::abs(r->final_objective() - 1.5) <= 1e-10,
                fmt("(b) %s ended at F=%.17g", name, r->final_objective()));
  }

  // One iteration at a time so the displacement stop rule cannot end the run early.
  auto cfg = default_config(SolverKind::pdca);
  cfg.subgradient_policy = SubgradientPolicy::extreme_negative;
  cfg.max_iters = 1;
  Vector x = scalar(0);
  bool stayed = true;
  for (int t = 0; t < 1000; ++t) {
    const auto r = pdca_solve(obj, x, cfg);
    x = r.x;
    stayed = stayed && x[0] == 0.0 && r.final_objective() == 2.0;
  }
  out.require(stayed, "(c) pdca left the origin");
  if (out.pass)
    out.detail = "classify(0)=critical,not d-stat; gist/pgm reach x=1, F=1.5; pdca stays at 0 "
                 "for 1000 iterations";
  return out;
}

Outcome ac2() {
  Outcome out;
  Rng rng(20240101);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index p = 1 + static_cast<Index>(rng.below(8));
    const Index K = static_cast<Index>(rng.below(static_cast<std::uint64_t>(p) + 1));
    const double tau = rng.uniform(0.0, 3.0);
    const Vector y = trial % 4 == 0 ? tie_heavy(p, rng) : gaussian_vector(p, rng, 2.0);
    const Vector x = prox_top_k_penalty(y, tau, K);
    const double gap = oracle::prox_objective(x, y, tau, K) - oracle::prox_top_k(y, tau, K).objective;
    worst = std::max(worst, std::abs(gap));
  }
  out.require(worst <= 1e-12, fmt("objective gap %.3g exceeds 1e-12", worst));
  if (out.pass)
    out.detail = fmt("200 trials, worst objective gap %.3g", worst);
  return out;
}

Outcome ac3() {
  Outcome out;
  const auto as_set = [](const std::vector<SignPattern> &pats) {
    std::set<std::vector<int>> s;
    for (const auto &v : pats)
      s.insert(std::vector<int>(v.entries.begin(), v.entries.end()));
    return s;
  };
  Rng rng(33);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index p = 1 + static_cast<Index>(rng.below(8));
    const Index K = static_cast<Index>(rng.below(static_cast<std::uint64_t>(p) + 1));
    const Vector x = trial % 2 ? tie_heavy(p, rng) : gaussian_vector(p, rng);
    const auto got = active_set_enumerate(x, K, {}, 0.0, 1u << 20);
    const auto want = oracle::active_patterns(x, K);
    const auto got_set = as_set(got);
    if (got_set.size() != got.size() ||
        got_set != std::set<std::vector<int>>(want.begin(), want.end()))
      ++mismatches;
  }
  out.require(mismatches == 0, fmt("%d of 100 points disagree with the oracle", mismatches));
  Vector tied(4);
  tied << 1, 0, 0, 0;
  const auto six = active_set_enumerate(tied, 2, {}, 0.0, 1000);
  out.require(six.size() == 6 && oracle::active_patterns(tied, 2).size() == 6,
              fmt("x=(1,0,0,0), K=2 gave %zu patterns", six.size()));
  if (out.pass)
    out.detail = "100 points match exhaustive enumeration; (1,0,0,0), K=2 gives 6 patterns";
  return out;
}

Outcome ac4() {
  Outcome out;
  Rng rng(44);
  int decrease_violations = 0;
  int window_violations = 0;
  for (int inst = 0; inst < 30; ++inst) {
    const Index p = 100, n = 100, K = 30;
    const auto A = gaussian(n, p, rng);
    const Vector b = gaussian_vector(n, rng, 3.0);
    const CompositeObjective obj(LeastSquares(DesignMatrix(A), b), TopKPenalty(1.0, K, p));
    const Vector x0 = gaussian_vector(p, rng);

    auto pcfg = default_config(SolverKind::pgm);
    pcfg.pgm_eta_factor = 1.1;
    pcfg.max_iters = 2000;
    const auto pg = pgm_solve(obj, x0, pcfg);
    const double eta = 1.1 * obj.lipschitz;
    for (std::size_t t = 1; t < pg.trace.size(); ++t) {
      const double d = pg.trace[t].displacement;
      if (pg.trace[t].F > pg.trace[t - 1].F - 0.5 * (eta - obj.lipschitz) * d * d + 1e-10)
        ++decrease_violations;
    }

    auto gcfg = default_config(SolverKind::gist);
    gcfg.max_iters = 2000;
    const auto gi = gist_solve(obj, x0, gcfg);
    const auto r = static_cast<std::size_t>(gcfg.window);
    double prev = -1.0;
    for (std::size_t t = 0; t < gi.trace.size(); ++t) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t j = t + 1 >= r ? t + 1 - r : 0; j <= t; ++j)
        m = std::max(m, gi.trace[j].F);
      if (t > 0 && m > prev)
        ++window_violations;
      prev = m;
    }
  }
  out.require(decrease_violations == 0,
              fmt("pgm sufficient decrease violated %d times", decrease_violations));
  out.require(window_violations == 0, fmt("gist window max rose %d times", window_violations));
  if (out.pass)
    out.detail = "30 instances: pgm sufficient decrease and gist window max hold at every step";
  return out;
}

Outcome ac5() {
  Outcome out;
  const Index p = 1000, K = 300;
  const double lambda = 10.0;
  int a_ok = 0, pdcae_violation = 0, pdcae_worse = 0, gist_faster = 0;
  double diff_sum = 0.0;
  const int seeds = 30;
  for (int s = 0; s < seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const Instance inst =
        gen_sparse_ls_instance({.p = p, .n = p, .k = K, .lambda = lambda, .seed = seed});
    const CompositeObjective obj(LeastSquares(inst.A, inst.b), TopKPenalty(lambda, K, p));
    const Vector x0 = perturbed_point(*inst.meta.planted, 0.01, Rng::derive(seed, 1));

    const auto gist = gist_solve(obj, x0, default_config(SolverKind::gist));
    const auto pgm = pgm_solve(obj, x0, default_config(SolverKind::pgm));
    const auto pdcae = pdcae_solve(obj, x0, default_config(SolverKind::pdcae));
    const auto nepdca = nepdca_solve(obj, x0, default_config(SolverKind::nepdca));

    a_ok += nnz(gist.x) == K && nnz(pgm.x) == K && nnz(nepdca.x) == K;
    const double ln_gist = std::log(gist.final_objective());
    const double ln_pgm = std::log(pgm.final_objective());
    pdcae_violation += nnz(pdcae.x) > K;
    pdcae_worse += std::log(pdcae.final_objective()) > ln_gist + 0.1;
    gist_faster += gist.wall_time_sec < pgm.wall_time_sec;
    diff_sum += std::abs(ln_gist - ln_pgm);
  }
  const double mean_diff = diff_sum / seeds;
  const bool b_ok = pdcae_violation >= 1 || pdcae_worse >= 20;
  out.require(a_ok == seeds, fmt("(a) support 300 on %d/30 seeds", a_ok));
  out.require(b_ok, fmt("(b) pdcae violates support on %d seeds, worse by >0.1 in ln F on %d/30",
                        pdcae_violation, pdcae_worse));
  out.require(gist_faster >= 25, fmt("(c) gist faster than pgm on %d/30", gist_faster));
  out.require(mean_diff <= 0.02, fmt("(d) mean |ln F gist - ln F pgm| = %.4g", mean_diff));
  if (out.pass)
    out.detail = fmt("(a) 30/30 (b) %d violations, %d worse (c) %d/30 (d) %.3g", pdcae_violation,
                     pdcae_worse, gist_faster, mean_diff);
  return out;
}

Outcome ac6() {
  Outcome out;
  Rng rng(66);
  int checked = 0, failures = 0;
  std::string first;
  const auto note = [&](bool ok, const std::string &what) {
    ++checked;
    if (!ok) {
      ++failures;
      if (first.empty())
        first = what;
    }
  };
  for (int inst = 0; inst < 50; ++inst) {
    const Index p = 2 + static_cast<Index>(rng.below(11));
    const Index n = 3 + static_cast<Index>(rng.below(10));
    const Index K = static_cast<Index>(rng.below(static_cast<std::uint64_t>(p)));
    const double lambda = rng.uniform(0.1, 2.0);
    const auto A = gaussian(n, p, rng);
    const Vector b = gaussian_vector(n, rng, 2.0);
    const Vector x0 = gaussian_vector(p, rng);
    const CompositeObjective obj(LeastSquares(DesignMatrix(A), b), TopKPenalty(lambda, K, p));

    for (auto kind : {SolverKind::gist, SolverKind::pgm}) {
      const auto cfg = default_config(kind);
      const auto r = kind == SolverKind::gist ? gist_solve(obj, x0, cfg) : pgm_solve(obj, x0, cfg);
      if (r.status != SolverStatus::converged)
        continue;
      const auto scan = check_d_stationary(obj, r.x, 1e-5);
      note(scan.verdict == Verdict::yes,
           fmt("instance %d %s not d-stationary (residual %.3g, |A|=%zu)", inst,
               std::string(to_string(kind)).c_str(), scan.residual, scan.active_set_size));
    }
    {
      const auto cfg = default_config(SolverKind::pdca);
      const auto r = pdca_solve(obj, x0, cfg);
      if (r.status == SolverStatus::converged) {
        const auto scan = check_critical(obj, r.x, 1e-5);
        note(scan.verdict == Verdict::yes,
             fmt("instance %d pdca not critical (residual %.3g)", inst, scan.residual));
      }
    }
    {
      const Index kappa = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      const TwoBlockObjective two(RobustLeastSquares(DesignMatrix(A), b),
                                  TopKPenalty(lambda, K, p), TopKPenalty(lambda, kappa, n));
      const auto r = gpalm_solve(two, x0, Vector::Zero(n), default_config(SolverKind::gpalm));
      if (r.status == SolverStatus::converged) {
        const auto rep = classify(two, r.x, r.z, 1e-5);
        note(rep.d_stationary() == Verdict::yes,
             fmt("instance %d gpalm not d-stationary (residuals %.3g, %.3g)", inst,
                 rep.x.worst_residual, rep.z.worst_residual));
      }
    }
  }
  out.require(failures == 0, fmt("%d of %d terminals failed, first: %s", failures, checked,
                                  first.c_str()));
  out.require(checked >= 150, fmt("only %d converged terminals were checked", checked));
  if (out.pass)
    out.detail = fmt("%d converged terminals certified", checked);
  return out;
}

Outcome ac7() {
  Outcome out;
  const Index p = 256, n = 72, K = 8, kappa = 2;
  int a_ok = 0, b_ok = 0, c_ok = 0, d_ok = 0;
  for (int s = 0; s < 30; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const RobustInstance inst = gen_robust_instance({.p = p,
                                                     .n = n,
                                                     .k = K,
                                                     .kappa = kappa,
                                                     .outlier_magnitude = 10.0,
                                                     .noise_sd = 0.05,
                                                     .seed = seed});
    const RobustLeastSquares loss(inst.A, inst.b);
    const double M = lipschitz_upper_bound(loss, {}).L;
    const auto vg = loss.value_grad(Vector::Zero(p), Vector::Zero(n));
    const auto bound = exact_penalty_bound({.grad_x_at_origin_norm = vg.grad_x.norm(),
                                            .grad_z_at_origin_norm = vg.grad_z.norm(),
                                            .M = M,
                                            .C_x = inst.x_true.norm(),
                                            .C_z = inst.z_true.norm()});
    const TwoBlockObjective pen(loss, TopKPenalty(bound.lambda1_min, K, p),
                                TopKPenalty(bound.lambda2_min, kappa, n));
    const TwoBlockObjective ball(loss, TopKPenalty(bound.lambda1_min, K, p),
                                 IndicatorL0Ball(kappa));

    Rng rng(Rng::derive(seed, 7));
    const Vector x0 = 0.01 * rng.uniform_vector(p, -1.0, 1.0);
    const Vector z0 = 0.01 * rng.uniform_vector(n, -1.0, 1.0);
    const auto cfg = [](SolverKind k) {
      auto c = default_config(k);
      c.stop_tol = 1e-6;
      return c;
    };
    const auto palm = palm_solve(pen, x0, z0, cfg(SolverKind::palm));
    const auto gpalm = gpalm_solve(pen, x0, z0, cfg(SolverKind::gpalm));
    const auto proj = pdcae_proj_solve(ball, x0, z0, cfg(SolverKind::pdcae_proj));

    a_ok += nnz(palm.x) <= K && nnz(palm.z) <= kappa && nnz(gpalm.x) <= K &&
            nnz(gpalm.z) <= kappa;
    b_ok += gpalm.iterations < palm.iterations;
    c_ok += nnz(proj.x) < K;
    d_ok += gpalm.final_objective() <= palm.final_objective() + 1e-6;
  }
  out.require(a_ok == 30, fmt("(a) sparsity held on %d/30 seeds", a_ok));
  out.require(b_ok >= 24, fmt("(b) gpalm used fewer iterations on %d/30", b_ok));
  out.require(c_ok >= 15, fmt("(c) pdcae_proj over-sparsified on %d/30", c_ok));
  out.require(d_ok >= 20, fmt("(d) gpalm F <= palm F on %d/30", d_ok));
  if (out.pass)
    out.detail = fmt("(a) %d/30 (b) %d/30 (c) %d/30 (d) %d/30", a_ok, b_ok, c_ok, d_ok);
  return out;
}

Outcome ac8() {
  Outcome out;
  int satisfied = 0;
  std::string first;
  for (int inst = 0; inst < 20; ++inst) {
    const auto seed = static_cast<std::uint64_t>(800 + inst);
    Rng rng(seed);
    const Index p = 3 + static_cast<Index>(rng.below(4));
    const Index n = 4 + static_cast<Index>(rng.below(5));
    const Index K = 1 + static_cast<Index>(rng.below(2));
    const Index kappa = 1;
    const RobustInstance data = gen_robust_instance({.p = p,
                                                     .n = n,
                                                     .k = K,
                                                     .kappa = kappa,
                                                     .outlier_magnitude = 5.0,
                                                     .noise_sd = 0.1,
                                                     .seed = seed});
    const Eigen::MatrixXd A = data.A.to_dense();
    const RobustLeastSquares loss(data.A, data.b);

    // Box for the solution set: global minimizers over a sweep of weights at and
    // above the floor, with a safety factor of 2.
    const double floor = 1.0;
    double cx = 0.0, cz = 0.0;
    for (double lam : {floor, 2.0 * floor, 4.0 * floor}) {
      const auto g = oracle::global_min_two_block(A, data.b, lam, K, lam, kappa);
      cx = std::max(cx, g.x.norm());
      cz = std::max(cz, g.z.norm());
    }
    const auto vg = loss.value_grad(Vector::Zero(p), Vector::Zero(n));
    const auto bound = exact_penalty_bound({.grad_x_at_origin_norm = vg.grad_x.norm(),
                                            .grad_z_at_origin_norm = vg.grad_z.norm(),
                                            .M = lipschitz_upper_bound(loss, {}).L,
                                            .C_x = 2.0 * cx,
                                            .C_z = 2.0 * cz,
                                            .lambda1_floor = floor,
                                            .lambda2_floor = floor});
    const auto g = oracle::global_min_two_block(A, data.b, bound.lambda1_min, K,
                                                bound.lambda2_min, kappa);
    const bool ok = nnz(g.x) <= K && nnz(g.z) <= kappa;
    satisfied += ok;
    if (!ok && first.empty())
      first = fmt("instance %d: ||x||_0=%ld (K=%ld), ||z||_0=%ld", inst,
                  static_cast<long>(nnz(g.x)), static_cast<long>(K), static_cast<long>(nnz(g.z)));
  }
  out.require(satisfied == 20, fmt("%d/20 global minimizers feasible; %s", satisfied,
                                   first.c_str()));
  if (out.pass)
    out.detail = "20/20 penalized global minimizers satisfy both l0 constraints";
  return out;
}

Vector central_difference(const std::function<double(const Vector &)> &f, const Vector &x) {
  Vector g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    Vector up = x, down = x;
    up[j] += h;
    down[j] -= h;
    g[j] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

double rel_err(const Vector &a, const Vector &b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

Outcome ac9() {
  Outcome out;
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(10));
    const Index p = 1 + static_cast<Index>(rng.below(10));
    const DesignMatrix A(gaussian(n, p, rng));
    const Vector b = gaussian_vector(n, rng);
    Vector labels(n);
    for (Index i = 0; i < n; ++i)
      labels[i] = rng.sign();
    const Vector x = gaussian_vector(p, rng);
    const Vector z = gaussian_vector(n, rng);

    const LeastSquares ls(A, b);
    worst = std::max(worst, rel_err(ls.value_grad(x).grad,
                                     central_difference([&](const Vector &v) { return ls.value(v); }, x)));
    const Logistic lg(A, labels);
    worst = std::max(worst, rel_err(lg.value_grad(x).grad,
                                     central_difference([&](const Vector &v) { return lg.value(v); }, x)));
    const RobustLeastSquares rb(A, b);
    const auto vg = rb.value_grad(x, z);
    worst = std::max(worst, rel_err(vg.grad_x, central_difference(
                                                   [&](const Vector &v) { return rb.value(v, z); }, x)));
    worst = std::max(worst, rel_err(vg.grad_z, central_difference(
                                                   [&](const Vector &v) { return rb.value(x, v); }, z)));
  }
  out.require(worst <= 1e-6, fmt("finite-difference relative error %.3g", worst));

  int mismatches = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(12));
    const Index p = 1 + static_cast<Index>(rng.below(12));
    DenseRowMajor D = DenseRowMajor::Zero(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j)
        if (rng.uniform() < 0.4)
          D(i, j) = rng.normal() * std::pow(10.0, rng.uniform(-6, 6));
    D(n - 1, p - 1) = 0.1;
    const Instance inst{DesignMatrix(D), gaussian_vector(n, rng), {}};
    std::stringstream first;
    serialize_libsvm(inst, first);
    std::istringstream in(first.str());
    const Instance back = parse_libsvm(in);
    std::ostringstream second;
    serialize_libsvm(back, second);
    mismatches += !(back.A.to_dense() == inst.A.to_dense() && back.b == inst.b &&
                    second.str() == first.str());
  }
  out.require(mismatches == 0, fmt("LIBSVM round trip failed on %d/20 instances", mismatches));
  if (out.pass)
    out.detail = fmt("gradients within %.2g of finite differences; LIBSVM round trip exact", worst);
  return out;
}

struct Criterion {
  const char *name;
  const char *title;
  double budget_sec;
  Outcome (*run)();
};

const Criterion criteria[] = {
    {"AC1", "counterexample suite", 1.0, ac1},
    {"AC2", "prox oracle equivalence", 10.0, ac2},
    {"AC3", "active-set oracle", 10.0, ac3},
    {"AC4", "sufficient-decrease invariant", 30.0, ac4},
    {"AC5", "sparse least squares p=N=1000, K=300", 300.0, ac5},
    {"AC6", "d-stationarity of terminals", 60.0, ac6},
    {"AC7", "robust regression p=256, N=72", 120.0, ac7},
    {"AC8", "exact-penalty sanity", 30.0, ac8},
    {"AC9", "gradient and parser suites", 10.0, ac9},
};

} // namespace

int main(int argc, char **argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  int ran = 0;
  for (const auto &c : criteria) {
    if (!only.empty() && only != c.name)
      continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_sec, fmt("took %.1fs, budget %.0fs", secs, c.budget_sec));
    std::printf("%s %s [%s] %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", c.name, c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
