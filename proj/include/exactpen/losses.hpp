#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "exactpen/design_matrix.hpp"

namespace exactpen {

struct ValueGrad {
  double value = 0.0;
  Vector grad;
};

struct BlockValueGrad {
  double value = 0.0;
  Vector grad_x;
  Vector grad_z;
};

namespace detail {

inline void require_finite(const Vector &v, const char *name) {
  if (!v.allFinite())
    throw InvalidDataError(std::string(name) + " contains NaN or Inf");
}

inline void require_size(const Vector &v, Index n, const char *name) {
  if (v.size() != n)
    throw SizingError(std::string(name) + " has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(n));
}

// ln(1 + exp(-m)) without overflow for large |m|.
inline double log1p_exp_neg(double m) {
  return m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

// 1 / (1 + exp(m)), i.e. sigmoid(-m).
inline double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

} // namespace detail

/// f(x) = 1/2 ||Ax - b||^2.
class LeastSquares {
public:
  LeastSquares(DesignMatrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    detail::require_size(b_, A_.rows(), "response b");
    detail::require_finite(b_, "response b");
  }

  Index dim() const { return A_.cols(); }
  const DesignMatrix &design() const { return A_; }
  const Vector &response() const { return b_; }

  double value(const Vector &x) const {
    detail::require_finite(x, "x");
    return 0.5 * (A_.apply(x) - b_).squaredNorm();
  }

  ValueGrad value_grad(const Vector &x) const {
    detail::require_finite(x, "x");
    const Vector r = A_.apply(x) - b_;
    return {0.5 * r.squaredNorm(), A_.apply_transpose(r)};
  }

private:
  DesignMatrix A_;
  Vector b_;
};

/// f(x) = (1/N) sum_i ln(1 + exp(-b_i <a_i, x>)), labels b_i in {-1, +1}.
class Logistic {
public:
  Logistic(DesignMatrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    detail::require_size(b_, A_.rows(), "labels b");
    for (Index i = 0; i < b_.size(); ++i)
      if (b_[i] != 1.0 && b_[i] != -1.0)
        throw InvalidDataError("logistic label at row " + std::to_string(i) +
                               " is not in {-1,+1}");
  }

  Index dim() const { return A_.cols(); }
  const DesignMatrix &design() const { return A_; }
  const Vector &response() const { return b_; }

  double value(const Vector &x) const {
    detail::require_finite(x, "x");
    const Vector margin = b_.cwiseProduct(A_.apply(x));
    double sum = 0.0;
    for (Index i = 0; i < margin.size(); ++i)
      sum += detail::log1p_exp_neg(margin[i]);
    return samples() ? sum / samples() : 0.0;
  }

  ValueGrad value_grad(const Vector &x) const {
    detail::require_finite(x, "x");
    const Vector margin = b_.cwiseProduct(A_.apply(x));
    const double n = samples();
    double sum = 0.0;
    Vector weight(margin.size());
    for (Index i = 0; i < margin.size(); ++i) {
      sum += detail::log1p_exp_neg(margin[i]);
      weight[i] = -b_[i] * detail::sigmoid_neg(margin[i]) / n;
    }
    if (n == 0.0)
      return {0.0, Vector::Zero(dim())};
    return {sum / n, A_.apply_transpose(weight)};
  }

  double samples() const { return static_cast<double>(A_.rows()); }

private:
  DesignMatrix A_;
  Vector b_;
};

/// f(x, z) = 1/2 ||Ax - b - z||^2; z carries one entry per sample.
class RobustLeastSquares {
public:
  RobustLeastSquares(DesignMatrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    detail::require_size(b_, A_.rows(), "response b");
    detail::require_finite(b_, "response b");
  }

  Index dim_x() const { return A_.cols(); }
  Index dim_z() const { return A_.rows(); }
  const DesignMatrix &design() const { return A_; }
  const Vector &response() const { return b_; }

  Vector residual(const Vector &x, const Vector &z) const {
    detail::require_finite(x, "x");
    detail::require_finite(z, "z");
    detail::require_size(z, dim_z(), "z");
    return A_.apply(x) - b_ - z;
  }

  double value(const Vector &x, const Vector &z) const {
    return 0.5 * residual(x, z).squaredNorm();
  }

  BlockValueGrad value_grad(const Vector &x, const Vector &z) const {
    const Vector r = residual(x, z);
    return {0.5 * r.squaredNorm(), A_.apply_transpose(r), -r};
  }

  Vector grad_x(const Vector &x, const Vector &z) const {
    return A_.apply_transpose(residual(x, z));
  }
  Vector grad_z(const Vector &x, const Vector &z) const { return -residual(x, z); }

private:
  DesignMatrix A_;
  Vector b_;
};

inline ValueGrad ls_value_grad(const DesignMatrix &A, const Vector &b, const Vector &x) {
  return LeastSquares(A, b).value_grad(x);
}

inline ValueGrad logistic_value_grad(const DesignMatrix &A, const Vector &b, const Vector &x) {
  return Logistic(A, b).value_grad(x);
}

inline BlockValueGrad robust_ls_value_grad(const DesignMatrix &A, const Vector &b,
                                           const Vector &x, const Vector &z) {
  return RobustLeastSquares(A, b).value_grad(x, z);
}

} // namespace exactpen
