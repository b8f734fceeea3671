#pragma once

#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "exactpen/io/instance.hpp"
#include "exactpen/io/rng.hpp"
#include "exactpen/losses.hpp"
#include "exactpen/penalties.hpp"
#include "exactpen/stationarity.hpp"

namespace exactpen {

/// N x p matrix with i.i.d. standard normal entries, each column scaled to unit norm.
inline DenseRowMajor gaussian_design(Index n, Index p, Rng &rng) {
  DenseRowMajor A(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j)
      A(i, j) = rng.normal();
  for (Index j = 0; j < p; ++j) {
    const double nrm = A.col(j).norm();
    if (nrm > 0.0)
      A.col(j) /= nrm;
  }
  return A;
}

/// center + scale * nu with nu ~ U[-1, 1]^n.
inline Vector perturbed_point(const Vector &center, double scale, std::uint64_t seed) {
  Rng rng(seed);
  return center + scale * rng.uniform_vector(center.size(), -1.0, 1.0);
}

struct SparseLsParams {
  Index p = 0;
  Index n = 0;
  Index k = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  /// Magnitude shared by the K-th and (K+1)-th largest planted entries.
  double tied_magnitude = 0.1;
  /// The K-1 larger planted magnitudes are drawn from U[lo, hi].
  double large_lo = 4.0;
  double large_hi = 6.0;
  /// Standard deviation of the response noise; sets the objective floor of solutions.
  double noise_sd = 0.05;
  int max_attempts = 100;
};

/// Least-squares instance with a planted point x~ that is critical for
/// f + lambda T_K under the DC split but not d-stationary.
///
/// x~ has K+1 nonzeros whose two smallest magnitudes tie. The response is chosen
/// so that grad f(x~) = lambda (v - u) for u = sign(x~) and v the active pattern
/// that keeps the first tied coordinate: grad f vanishes on that pattern's support
/// and equals -lambda sign(x~_j) on the other tied coordinate j. The residual is
/// r = A_S w - e for Gaussian noise e, with w solving A_S^T r = grad_S (needs
/// N >= K+1). Off the support the gradient A^T r must stay within
/// [-lambda, lambda], which the certificate check enforces (retrying with a
/// derived seed).
inline Instance gen_sparse_ls_instance(const SparseLsParams &prm) {
  if (prm.k < 0 || prm.k >= prm.p)
    throw RangeError("need 0 <= K < p");
  if (prm.n < prm.k + 1)
    throw RangeError("need N >= K + 1 to plant a critical point");
  if (!(prm.lambda > 0.0))
    throw InvalidDataError("lambda must be positive");

  for (int attempt = 0; attempt < prm.max_attempts; ++attempt) {
    Rng rng(Rng::derive(prm.seed, static_cast<std::uint64_t>(attempt)));
    DenseRowMajor A = gaussian_design(prm.n, prm.p, rng);

    const std::vector<Index> support = rng.sample_without_replacement(prm.p, prm.k + 1);
    Vector planted = Vector::Zero(prm.p);
    for (Index i = 0; i + 2 < static_cast<Index>(support.size()); ++i)
      planted[support[static_cast<std::size_t>(i)]] =
          rng.sign() * rng.uniform(prm.large_lo, prm.large_hi);
    const Index tied_in = support[static_cast<std::size_t>(prm.k - 1)];
    const Index tied_out = support[static_cast<std::size_t>(prm.k)];
    planted[tied_in] = rng.sign() * prm.tied_magnitude;
    planted[tied_out] = rng.sign() * prm.tied_magnitude;

    Eigen::MatrixXd A_S(prm.n, prm.k + 1);
    Vector grad_S = Vector::Zero(prm.k + 1);
    for (Index i = 0; i <= prm.k; ++i) {
      const Index j = support[static_cast<std::size_t>(i)];
      A_S.col(i) = A.col(j);
      if (j == tied_out)
        grad_S[i] = -prm.lambda * (planted[j] > 0.0 ? 1.0 : -1.0);
    }
    Vector noise(prm.n);
    for (Index i = 0; i < prm.n; ++i)
      noise[i] = prm.noise_sd * rng.normal();
    // r = A_S w - noise with A_S^T r = grad_S.
    const Vector w =
        (A_S.transpose() * A_S).ldlt().solve(grad_S + A_S.transpose() * noise);
    const Vector r = A_S * w - noise;
    Vector b = A * planted - r;

    Instance inst{DesignMatrix(std::move(A)), std::move(b), {}};
    inst.meta.name = "sparse_ls_p" + std::to_string(prm.p) + "_n" + std::to_string(prm.n) +
                     "_k" + std::to_string(prm.k) + "_s" + std::to_string(prm.seed);
    inst.meta.p = prm.p;
    inst.meta.n = prm.n;
    inst.meta.source = "synthetic:planted_critical";
    inst.meta.seed = prm.seed;

    const TopKPenalty pen(prm.lambda, prm.k, prm.p);
    const Vector grad = ls_value_grad(inst.A, inst.b, planted).grad;
    const auto crit = check_critical_at(grad, planted, pen, 1e-8);
    const auto dstat = check_d_stationary_at(grad, planted, pen, 1e-8);
    if (crit.verdict == Verdict::yes && dstat.verdict == Verdict::no) {
      inst.meta.planted = std::move(planted);
      return inst;
    }
  }
  throw GenerationError("could not certify a planted critical, non-d-stationary point after " +
                        std::to_string(prm.max_attempts) + " attempts");
}

struct RobustParams {
  Index p = 0;
  Index n = 0;
  Index k = 0;
  Index kappa = 0;
  double outlier_magnitude = 10.0;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
};

struct RobustInstance {
  DesignMatrix A;
  Vector b;
  Vector x_true;
  /// Outlier shifts: b = A x_true - z_true + noise, so z_true absorbs A x_true - b.
  Vector z_true;
  std::vector<Index> outliers;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

/// Sparse regression data with kappa gross outliers. x_true has K entries
/// +-U[1, 2]; each outlier row is shifted by +-outlier_magnitude.
inline RobustInstance gen_robust_instance(const RobustParams &prm) {
  if (prm.k < 0 || prm.k >= prm.p)
    throw RangeError("need 0 <= K < p");
  if (prm.kappa < 0 || prm.kappa >= prm.n)
    throw RangeError("need 0 <= kappa < N");
  Rng rng(Rng::derive(prm.seed, 0x70b));
  DenseRowMajor A = gaussian_design(prm.n, prm.p, rng);

  Vector x_true = Vector::Zero(prm.p);
  for (Index j : rng.sample_without_replacement(prm.p, prm.k))
    x_true[j] = rng.sign() * rng.uniform(1.0, 2.0);

  Vector b = A * x_true;
  for (Index i = 0; i < prm.n; ++i)
    b[i] += prm.noise_sd * rng.normal();

  std::vector<Index> outliers = rng.sample_without_replacement(prm.n, prm.kappa);
  std::sort(outliers.begin(), outliers.end());
  Vector z_true = Vector::Zero(prm.n);
  for (Index i : outliers) {
    z_true[i] = rng.sign() * prm.outlier_magnitude;
    b[i] -= z_true[i];
  }
  return {DesignMatrix(std::move(A)), std::move(b), std::move(x_true), std::move(z_true),
          std::move(outliers), prm.noise_sd, prm.seed};
}

} // namespace exactpen
