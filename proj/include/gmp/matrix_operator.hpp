#pragma once

#include <variant>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gmp/atomset.hpp"

namespace gmp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Read-only view of a residual matrix for the power methods: either a
/// dense matrix or a sparse one (masked completion problems, where the
/// residual lives on the observed coordinates only).
class MatrixOperator {
 public:
  MatrixOperator(Matrix dense);  // NOLINT(google-explicit-constructor)
  MatrixOperator(SparseMatrix sparse);  // NOLINT(google-explicit-constructor)

  Eigen::Index rows() const;
  Eigen::Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }

  Vector apply(const Eigen::Ref<const Vector>& x) const;            // A x
  Vector apply_transpose(const Eigen::Ref<const Vector>& x) const;  // A' x

  /// u' A v
  double bilinear(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) const;

  double frobenius_norm() const;
  Vector row_squared_norms() const;
  Vector row(Eigen::Index i) const;

  /// Largest |A_ij - A_ji| relative to the largest |A_ij|. Square operators only.
  double relative_asymmetry() const;

  Matrix to_dense() const;

 private:
  std::variant<Matrix, SparseMatrix> storage_;
};

}  // namespace gmp
