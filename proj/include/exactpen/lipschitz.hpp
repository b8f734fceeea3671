#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

#include "exactpen/losses.hpp"

namespace exactpen {

enum class LipschitzMethod { automatic, power_iteration, exact_small };

struct LipschitzOptions {
  double tol = 1e-10;
  LipschitzMethod method = LipschitzMethod::automatic;
  /// Matrices whose smaller side is at most this use the dense eigensolver under `automatic`.
  Index exact_threshold = 200;
  int max_iterations = 10000;
  std::uint64_t seed = 0x5eed;
  /// Robust loss only: return lambda_max(A^T A) + 1 instead of iterating on [A, -I].
  bool robust_cheap_bound = false;
};

struct LipschitzEstimate {
  double L = 0.0;
  LipschitzMethod method = LipschitzMethod::power_iteration;
  int iterations_used = 0;
  double relative_tolerance = 0.0;
  bool converged = true;
  bool degenerate = false;
};

namespace detail {

// Largest eigenvalue of the PSD operator B = M^T M given v -> M v and w -> M^T w.
inline LipschitzEstimate power_iterate(Index n, const std::function<Vector(const Vector &)> &op,
                                       const std::function<Vector(const Vector &)> &op_t,
                                       const LipschitzOptions &opts) {
  LipschitzEstimate est;
  est.method = LipschitzMethod::power_iteration;
  est.relative_tolerance = opts.tol;
  if (n == 0) {
    est.L = std::numeric_limits<double>::epsilon();
    est.degenerate = true;
    return est;
  }

  // Normalized all-ones with a small deterministic perturbation so that the
  // start vector is not orthogonal to the dominant eigenvector by symmetry.
  Vector v(n);
  std::uint64_t state = opts.seed;
  for (Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    const double u = static_cast<double>(state >> 11) * 0x1.0p-53;
    v[i] = 1.0 + 1e-3 * (u - 0.5);
  }
  v.normalize();

  double q_prev = -1.0;
  double best = 0.0;
  est.converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Vector Mv = op(v);
    const double q = Mv.squaredNorm();
    best = std::max(best, q);
    est.iterations_used = it;
    if (q == 0.0)
      break;
    Vector w = op_t(Mv);
    const double nw = w.norm();
    if (nw == 0.0)
      break;
    v = w / nw;
    if (q_prev > 0.0 && std::abs(q - q_prev) < opts.tol * q) {
      est.converged = true;
      break;
    }
    q_prev = q;
  }
  if (best <= 0.0) {
    est.L = std::numeric_limits<double>::epsilon();
    est.degenerate = true;
    est.converged = true;
    return est;
  }
  est.L = best * (1.0 + 10.0 * opts.tol);
  return est;
}

inline double dense_lambda_max(const Eigen::MatrixXd &gram) {
  if (gram.size() == 0)
    return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// lambda_max(A^T A) through the smaller Gram matrix.
inline double exact_gram_lambda_max(const DesignMatrix &A) {
  const Eigen::MatrixXd D = A.to_dense();
  if (D.rows() <= D.cols())
    return dense_lambda_max(D * D.transpose());
  return dense_lambda_max(D.transpose() * D);
}

inline bool use_exact(const DesignMatrix &A, const LipschitzOptions &opts) {
  switch (opts.method) {
  case LipschitzMethod::exact_small:
    return true;
  case LipschitzMethod::power_iteration:
    return false;
  case LipschitzMethod::automatic:
    break;
  }
  return std::min(A.rows(), A.cols()) <= opts.exact_threshold;
}

inline LipschitzEstimate exact_estimate(double lambda_max, const LipschitzOptions &opts) {
  LipschitzEstimate est;
  est.method = LipschitzMethod::exact_small;
  est.relative_tolerance = opts.tol;
  if (lambda_max <= 0.0) {
    est.L = std::numeric_limits<double>::epsilon();
    est.degenerate = true;
    return est;
  }
  est.L = lambda_max * (1.0 + 10.0 * opts.tol);
  return est;
}

} // namespace detail

/// Upper estimate of lambda_max(A^T A).
inline LipschitzEstimate gram_lambda_max(const DesignMatrix &A, const LipschitzOptions &opts = {}) {
  if (detail::use_exact(A, opts))
    return detail::exact_estimate(detail::exact_gram_lambda_max(A), opts);
  return detail::power_iterate(
      A.cols(), [&](const Vector &v) { return A.apply(v); },
      [&](const Vector &w) { return A.apply_transpose(w); }, opts);
}

inline LipschitzEstimate lipschitz_upper_bound(const LeastSquares &loss,
                                               const LipschitzOptions &opts = {}) {
  return gram_lambda_max(loss.design(), opts);
}

/// Hessian of the 1/N-scaled logistic loss is bounded by A^T A / (4N).
inline LipschitzEstimate lipschitz_upper_bound(const Logistic &loss,
                                               const LipschitzOptions &opts = {}) {
  LipschitzEstimate est = gram_lambda_max(loss.design(), opts);
  if (!est.degenerate)
    est.L /= 4.0 * loss.samples();
  return est;
}

/// Joint constant of (x, z) -> grad f(x, z): lambda_max of [A, -I]^T [A, -I].
inline LipschitzEstimate lipschitz_upper_bound(const RobustLeastSquares &loss,
                                               const LipschitzOptions &opts = {}) {
  const DesignMatrix &A = loss.design();
  if (opts.robust_cheap_bound || detail::use_exact(A, opts)) {
    LipschitzEstimate est = gram_lambda_max(A, opts);
    est.L = (est.degenerate ? 0.0 : est.L) + 1.0;
    est.degenerate = false;
    return est;
  }
  const Index p = A.cols();
  const Index n = A.rows();
  return detail::power_iterate(
      p + n,
      [&](const Vector &v) -> Vector { return A.apply(v.head(p)) - v.tail(n); },
      [&](const Vector &w) -> Vector {
        Vector out(p + n);
        out.head(p) = A.apply_transpose(w);
        out.tail(n) = -w;
        return out;
      },
      opts);
}

} // namespace exactpen
