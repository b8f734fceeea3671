#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "exactpen/errors.hpp"

namespace exactpen {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using DenseRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

inline bool all_finite(const Vector &v) { return v.allFinite(); }

/// Input matrix A, stored either dense (row-major) or as compressed sparse rows.
///
/// Products go through `apply` (A x) and `apply_transpose` (A^T r); both storage
/// kinds give the same values up to summation order.
class DesignMatrix {
public:
  DesignMatrix() : storage_(DenseRowMajor(0, 0)) {}

  explicit DesignMatrix(DenseRowMajor dense) : storage_(std::move(dense)) {
    if (!std::get<DenseRowMajor>(storage_).allFinite())
      throw InvalidDataError("design matrix contains non-finite entries");
  }

  explicit DesignMatrix(const Eigen::MatrixXd &dense) : DesignMatrix(DenseRowMajor(dense)) {}

  explicit DesignMatrix(CsrMatrix sparse) : storage_(std::move(sparse)) {
    auto &m = std::get<CsrMatrix>(storage_);
    m.makeCompressed();
    for (Index k = 0; k < m.nonZeros(); ++k)
      if (!std::isfinite(m.valuePtr()[k]))
        throw InvalidDataError("design matrix contains non-finite entries");
  }

  /// Builds from raw CSR arrays. Offsets must be nondecreasing with
  /// `row_offsets.back() == values.size()`; column indices must lie in [0, n_cols).
  /// Duplicate (row, col) entries are summed and stored zeros are kept harmlessly.
  static DesignMatrix from_csr(Index n_rows, Index n_cols, std::span<const Index> row_offsets,
                               std::span<const Index> col_indices,
                               std::span<const double> values) {
    if (n_rows < 0 || n_cols < 0)
      throw SizingError("negative matrix dimensions");
    if (static_cast<Index>(row_offsets.size()) != n_rows + 1)
      throw SizingError("row offset array must have n_rows + 1 entries");
    if (col_indices.size() != values.size())
      throw SizingError("column index and value arrays differ in length");
    if (row_offsets.front() != 0 ||
        row_offsets.back() != static_cast<Index>(values.size()))
      throw InvalidDataError("row offsets must start at 0 and end at nnz");

    std::vector<Eigen::Triplet<double, Index>> triplets;
    triplets.reserve(values.size());
    for (Index i = 0; i < n_rows; ++i) {
      if (row_offsets[i + 1] < row_offsets[i])
        throw InvalidDataError("row offsets must be nondecreasing");
      for (Index k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
        const Index j = col_indices[k];
        if (j < 0 || j >= n_cols)
          throw InvalidDataError("column index " + std::to_string(j) + " out of range");
        triplets.emplace_back(i, j, values[k]);
      }
    }
    CsrMatrix m(n_rows, n_cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return DesignMatrix(std::move(m));
  }

  Index rows() const {
    return std::visit([](const auto &m) { return static_cast<Index>(m.rows()); }, storage_);
  }
  Index cols() const {
    return std::visit([](const auto &m) { return static_cast<Index>(m.cols()); }, storage_);
  }
  bool is_sparse() const { return std::holds_alternative<CsrMatrix>(storage_); }

  const DenseRowMajor *dense() const { return std::get_if<DenseRowMajor>(&storage_); }
  const CsrMatrix *sparse() const { return std::get_if<CsrMatrix>(&storage_); }

  Vector apply(const Vector &x) const {
    if (x.size() != cols())
      throw SizingError("A*x: x has " + std::to_string(x.size()) + " entries, expected " +
                        std::to_string(cols()));
    return std::visit([&](const auto &m) -> Vector { return m * x; }, storage_);
  }

  Vector apply_transpose(const Vector &r) const {
    if (r.size() != rows())
      throw SizingError("A^T*r: r has " + std::to_string(r.size()) + " entries, expected " +
                        std::to_string(rows()));
    return std::visit([&](const auto &m) -> Vector { return m.transpose() * r; }, storage_);
  }

  Eigen::MatrixXd to_dense() const {
    return std::visit([](const auto &m) -> Eigen::MatrixXd { return Eigen::MatrixXd(m); },
                      storage_);
  }

  /// Copy with a column of ones inserted in front (index 0).
  DesignMatrix with_leading_ones() const {
    if (const auto *d = dense()) {
      DenseRowMajor out(d->rows(), d->cols() + 1);
      out.col(0).setOnes();
      out.rightCols(d->cols()) = *d;
      return DesignMatrix(std::move(out));
    }
    const auto &s = *sparse();
    std::vector<Eigen::Triplet<double, Index>> triplets;
    triplets.reserve(s.nonZeros() + s.rows());
    for (Index i = 0; i < s.rows(); ++i) {
      triplets.emplace_back(i, 0, 1.0);
      for (CsrMatrix::InnerIterator it(s, i); it; ++it)
        triplets.emplace_back(i, it.col() + 1, it.value());
    }
    CsrMatrix out(s.rows(), s.cols() + 1);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return DesignMatrix(std::move(out));
  }

private:
  std::variant<DenseRowMajor, CsrMatrix> storage_;
};

} // namespace exactpen
