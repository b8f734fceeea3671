#include <gtest/gtest.h>

#include "exactpen/io/generators.hpp"
#include "exactpen/objective.hpp"
#include "exactpen/solvers/proximal_gradient.hpp"
#include "exactpen/stationarity.hpp"
#include "exactpen/testing/oracles.hpp"

using namespace exactpen;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

struct SmallProblem {
  CompositeObjective<LeastSquares, TopKPenalty> obj;
  Eigen::MatrixXd A;
  Vector b;
};

SmallProblem random_problem(Index n, Index p, Index K, double lambda, Rng &rng) {
  Eigen::MatrixXd A(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j)
      A(i, j) = rng.normal();
  Vector b(n);
  for (Index i = 0; i < n; ++i)
    b[i] = 2.0 * rng.normal();
  return {CompositeObjective(LeastSquares(DesignMatrix(A), b), TopKPenalty(lambda, K, p)), A, b};
}

} // namespace

TEST(ProxResidual, CounterexampleValues) {
  const auto obj = counterexample_objective();
  for (double eta : {0.5, 1.0, 3.0})
    EXPECT_EQ(prox_residual(obj, scalar(1), eta), 0.0);
  EXPECT_DOUBLE_EQ(prox_residual(obj, scalar(0), 1.0), 1.0);
  EXPECT_THROW(prox_residual(obj, scalar(0), 0.0), InvalidDataError);
}

TEST(ProxResidual, ConvexMinimizerIsFixedPoint) {
  DenseRowMajor A(2, 2);
  A << 2, 0, 0, 1;
  const Vector b = Vector::Constant(2, 1.0);
  const CompositeObjective obj(LeastSquares(DesignMatrix(A), b), TopKPenalty(0.0, 1, 2));
  Vector x(2);
  x << 0.5, 1.0;
  EXPECT_EQ(prox_residual(obj, x, 4.4), 0.0);
}

TEST(CheckCritical, Counterexample) {
  const auto obj = counterexample_objective();
  EXPECT_EQ(check_critical(obj, scalar(0), 1e-8).verdict, Verdict::yes);
  EXPECT_EQ(check_critical(obj, scalar(1), 1e-8).verdict, Verdict::yes);
  EXPECT_EQ(check_critical(obj, scalar(0.5), 1e-8).verdict, Verdict::no);
}

TEST(CheckDStationary, Counterexample) {
  const auto obj = counterexample_objective();
  const auto at0 = check_d_stationary(obj, scalar(0), 1e-8);
  EXPECT_EQ(at0.verdict, Verdict::no);
  EXPECT_NEAR(at0.residual, 1.0, 1e-12);
  ASSERT_TRUE(at0.pattern.has_value());
  EXPECT_EQ(at0.pattern->entries[0], 0);
  EXPECT_EQ(check_d_stationary(obj, scalar(1), 1e-8).verdict, Verdict::yes);
}

TEST(Classify, Counterexample) {
  const auto obj = counterexample_objective();
  const auto r0 = classify(obj, scalar(0), 1e-8);
  EXPECT_EQ(r0.critical, Verdict::yes);
  EXPECT_EQ(r0.d_stationary, Verdict::no);
  const auto r1 = classify(obj, scalar(1), 1e-8);
  EXPECT_EQ(r1.critical, Verdict::yes);
  EXPECT_EQ(r1.d_stationary, Verdict::yes);
  EXPECT_EQ(r1.prox_residual, 0.0);
  EXPECT_EQ(r1.tolerance, 1e-8);
}

TEST(Classify, GenericPointIsNotCritical) {
  Rng rng(3);
  auto pr = random_problem(6, 5, 2, 0.5, rng);
  Vector x(5);
  for (Index j = 0; j < 5; ++j)
    x[j] = rng.normal();
  const auto r = classify(pr.obj, x);
  EXPECT_EQ(r.critical, Verdict::no);
  EXPECT_EQ(r.d_stationary, Verdict::no);
}

TEST(Classify, SingletonActiveSetMakesBothChecksAgree) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto pr = random_problem(8, 5, 2, 0.3, rng);
    const auto res = gist_solve(pr.obj, Vector::Zero(5), default_config(SolverKind::gist));
    const auto scan = check_d_stationary(pr.obj, res.x, 1e-5);
    if (scan.active_set_size == 1) {
      EXPECT_EQ(check_critical(pr.obj, res.x, 1e-5).verdict, scan.verdict);
    }
  }
}

TEST(Classify, OverflowIsIndeterminate) {
  const Index p = 10;
  DenseRowMajor A = DenseRowMajor::Identity(p, p);
  const CompositeObjective obj(LeastSquares(DesignMatrix(A), Vector::Zero(p)),
                               TopKPenalty(1.0, 5, p));
  const auto r = classify(obj, Vector::Zero(p), 1e-5, 10);
  EXPECT_TRUE(r.overflow);
  EXPECT_EQ(r.d_stationary, Verdict::indeterminate);
  EXPECT_EQ(r.critical, Verdict::indeterminate);
}

TEST(Hierarchy, DStationaryImpliesCriticalAndSmallProxResidual) {
  Rng rng(2025);
  int d_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index p = 2 + static_cast<Index>(rng.below(7));
    const Index n = 2 + static_cast<Index>(rng.below(8));
    const Index K = static_cast<Index>(rng.below(static_cast<std::uint64_t>(p)));
    auto pr = random_problem(n, p, K, rng.uniform(0.1, 2.0), rng);
    Vector x(p);
    if (trial % 2 == 0) {
      // Terminal points of GIST are the interesting (stationary) population.
      SolverConfig cfg = default_config(SolverKind::gist);
      cfg.stop_tol = 1e-12;
      x = gist_solve(pr.obj, Vector::Zero(p), cfg).x;
    } else {
      for (Index j = 0; j < p; ++j)
        x[j] = rng.uniform() < 0.4 ? 0.0 : rng.normal();
    }
    const double tol = 1e-6;
    const auto r = classify(pr.obj, x, tol);
    if (r.d_stationary == Verdict::yes) {
      ++d_count;
      EXPECT_EQ(r.critical, Verdict::yes);
      const double g = pr.obj.loss.value_grad(x).grad.norm();
      EXPECT_LE(r.prox_residual, tol * (1.0 + g))
          << "trial " << trial;
    }
  }
  EXPECT_GT(d_count, 300);
}

TEST(Hierarchy, DirectionalOracleAgreesWithCertificate) {
  Rng rng(77);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 2 + static_cast<Index>(rng.below(5));
    const Index K = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p - 1)));
    auto pr = random_problem(6, p, K, 0.5, rng);
    SolverConfig cfg = default_config(SolverKind::pgm);
    cfg.stop_tol = 1e-14;
    const Vector x = pgm_solve(pr.obj, Vector::Zero(p), cfg).x;
    if (check_d_stationary(pr.obj, x, 1e-8).verdict != Verdict::yes)
      continue;
    ++checked;
    const double worst = oracle::min_directional_change(
        [&](const Vector &v) { return pr.obj.value(v); }, x, 1e-6, 10000,
        Rng::derive(77, static_cast<std::uint64_t>(trial)));
    EXPECT_GE(worst, -1e-8) << "trial " << trial;
  }
  EXPECT_GE(checked, 15);
}

TEST(Hierarchy, PlantedPointHasADescentDirection) {
  SparseLsParams prm{.p = 6, .n = 8, .k = 2, .lambda = 1.0, .seed = 3};
  prm.large_lo = 1.0;
  prm.large_hi = 2.0;
  const Instance inst = gen_sparse_ls_instance(prm);
  const CompositeObjective obj(LeastSquares(inst.A, inst.b), TopKPenalty(1.0, 2, 6));
  const Vector &x = *inst.meta.planted;
  const auto r = classify(obj, x, 1e-8);
  EXPECT_EQ(r.critical, Verdict::yes);
  EXPECT_EQ(r.d_stationary, Verdict::no);
  // Moving mass from the tied coordinate that is dropped by the witness decreases F.
  const double worst = oracle::min_directional_change([&](const Vector &v) { return obj.value(v); },
                                                      x, 1e-6, 10000, 5);
  EXPECT_LT(worst, -1e-9);
}

TEST(Invariance, PermutingCoordinatesJointly) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Index p = 6, n = 7;
    Eigen::MatrixXd A(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j)
        A(i, j) = rng.normal();
    Vector b(n);
    for (Index i = 0; i < n; ++i)
      b[i] = rng.normal();
    const ExcludedSet ex{0};
    const CompositeObjective obj(LeastSquares(DesignMatrix(A), b), TopKPenalty(0.4, 2, p, ex));
    SolverConfig cfg = default_config(SolverKind::gist);
    cfg.stop_tol = 1e-12;
    Vector x = trial % 2 ? gist_solve(obj, Vector::Zero(p), cfg).x : Vector(Vector::Zero(p));
    if (trial % 4 == 3)
      x[3] = 0.0;

    std::vector<Index> perm(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j)
      perm[static_cast<std::size_t>(j)] = j;
    for (Index j = p - 1; j > 0; --j)
      std::swap(perm[static_cast<std::size_t>(j)],
                perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(j) + 1))]);
    Eigen::MatrixXd Ap(n, p);
    Vector xp(p);
    Index new_ex = -1;
    for (Index j = 0; j < p; ++j) {
      const Index src = perm[static_cast<std::size_t>(j)];
      Ap.col(j) = A.col(src);
      xp[j] = x[src];
      if (src == 0)
        new_ex = j;
    }
    const CompositeObjective objp(LeastSquares(DesignMatrix(Ap), b),
                                  TopKPenalty(0.4, 2, p, ExcludedSet{new_ex}));
    const auto a = check_d_stationary(obj, x, 1e-6);
    const auto c = check_d_stationary(objp, xp, 1e-6);
    EXPECT_EQ(a.verdict, c.verdict) << "trial " << trial;
    EXPECT_NEAR(a.residual, c.residual, 1e-12);
    EXPECT_EQ(a.active_set_size, c.active_set_size);
  }
}

TEST(TwoBlock, L0BlockCertificate) {
  DenseRowMajor A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  Vector b(3);
  b << 1, 2, 10;
  const RobustLeastSquares loss{DesignMatrix(A), b};
  const TwoBlockObjective obj(loss, TopKPenalty(0.0, 2, 2), IndicatorL0Ball(1));
  // z absorbs the outlier in row 2 and x solves the remaining rows exactly.
  Vector x(2), z(3);
  x << 1, 2;
  z << 0, 0, -7;
  const auto r = classify(obj, x, z, 1e-10);
  EXPECT_EQ(r.critical(), Verdict::yes);
  EXPECT_EQ(r.d_stationary(), Verdict::yes);
  z[2] = -6;
  EXPECT_EQ(classify(obj, x, z, 1e-10).d_stationary(), Verdict::no);
}
