#include "gmp/matrix_operator.hpp"

#include <algorithm>
#include <cmath>

namespace gmp {

MatrixOperator::MatrixOperator(Matrix dense) : storage_(std::move(dense)) {}

MatrixOperator::MatrixOperator(SparseMatrix sparse) : storage_(std::move(sparse)) {
  std::get<SparseMatrix>(storage_).makeCompressed();
}

Eigen::Index MatrixOperator::rows() const {
  return std::visit([](const auto& m) { return m.rows(); }, storage_);
}

Eigen::Index MatrixOperator::cols() const {
  return std::visit([](const auto& m) { return m.cols(); }, storage_);
}

Vector MatrixOperator::apply(const Eigen::Ref<const Vector>& x) const {
  return std::visit([&](const auto& m) -> Vector { return m * x; }, storage_);
}

Vector MatrixOperator::apply_transpose(const Eigen::Ref<const Vector>& x) const {
  return std::visit([&](const auto& m) -> Vector { return m.transpose() * x; }, storage_);
}

double MatrixOperator::bilinear(const Eigen::Ref<const Vector>& u,
                                const Eigen::Ref<const Vector>& v) const {
  return u.dot(apply(v));
}

double MatrixOperator::frobenius_norm() const {
  return std::visit([](const auto& m) { return m.norm(); }, storage_);
}

Vector MatrixOperator::row_squared_norms() const {
  if (const auto* d = std::get_if<Matrix>(&storage_)) return d->rowwise().squaredNorm();
  const auto& s = std::get<SparseMatrix>(storage_);
  Vector out = Vector::Zero(s.rows());
  for (Eigen::Index i = 0; i < s.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) out[i] += it.value() * it.value();
  }
  return out;
}

Vector MatrixOperator::row(Eigen::Index i) const {
  if (const auto* d = std::get_if<Matrix>(&storage_)) return d->row(i).transpose();
  const auto& s = std::get<SparseMatrix>(storage_);
  Vector out = Vector::Zero(s.cols());
  for (SparseMatrix::InnerIterator it(s, i); it; ++it) out[it.col()] = it.value();
  return out;
}

double MatrixOperator::relative_asymmetry() const {
  if (rows() != cols()) return INFINITY;
  if (const auto* d = std::get_if<Matrix>(&storage_)) {
    const double scale = d->cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (*d - d->transpose()).cwiseAbs().maxCoeff() / scale;
  }
  const auto& s = std::get<SparseMatrix>(storage_);
  SparseMatrix t = s.transpose();
  SparseMatrix diff = s - t;
  double scale = 0.0, worst = 0.0;
  for (Eigen::Index i = 0; i < s.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  for (Eigen::Index i = 0; i < diff.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(diff, i); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

Matrix MatrixOperator::to_dense() const {
  if (const auto* d = std::get_if<Matrix>(&storage_)) return *d;
  return Matrix(std::get<SparseMatrix>(storage_));
}

}  // namespace gmp
