#include "gmp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gmp {

Mask make_mask(std::vector<Coordinate> coords, Eigen::Index rows, Eigen::Index cols) {
  if (coords.empty()) throw std::invalid_argument("mask: observed set is empty");
  for (const auto& c : coords) {
    if (c.row < 0 || c.row >= rows || c.col < 0 || c.col >= cols) {
      throw std::invalid_argument("mask: index (" + std::to_string(c.row) + ", " +
                                  std::to_string(c.col) + ") out of range");
    }
  }
  std::sort(coords.begin(), coords.end());
  if (std::adjacent_find(coords.begin(), coords.end()) != coords.end()) {
    throw std::invalid_argument("mask: duplicate observed index");
  }
  return coords;
}

TargetProblem::TargetProblem(Matrix Y, bool symmetric_mode)
    : rows_(Y.rows()), cols_(Y.cols()), dense_(std::move(Y)), symmetric_(symmetric_mode) {
  if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("target: empty matrix");
  validate_mask_and_symmetry();
}

TargetProblem::TargetProblem(const Matrix& Y, Mask mask, bool symmetric_mode)
    : rows_(Y.rows()), cols_(Y.cols()), symmetric_(symmetric_mode) {
  mask_ = make_mask(std::move(mask), rows_, cols_);
  values_.reserve(mask_->size());
  for (const auto& c : *mask_) values_.push_back(Y(c.row, c.col));
  validate_mask_and_symmetry();
}

TargetProblem::TargetProblem(Eigen::Index rows, Eigen::Index cols, Mask mask,
                             std::vector<double> values, bool symmetric_mode)
    : rows_(rows), cols_(cols), symmetric_(symmetric_mode) {
  if (mask.size() != values.size()) throw std::invalid_argument("target: mask/value length mismatch");
  std::vector<std::size_t> order(mask.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mask[a] < mask[b]; });
  Mask sorted;
  sorted.reserve(mask.size());
  values_.reserve(mask.size());
  for (std::size_t i : order) {
    sorted.push_back(mask[i]);
    values_.push_back(values[i]);
  }
  mask_ = make_mask(std::move(sorted), rows_, cols_);
  validate_mask_and_symmetry();
}

void TargetProblem::validate_mask_and_symmetry() {
  if (!symmetric_) return;
  if (rows_ != cols_) throw std::invalid_argument("target: symmetric mode needs a square matrix");
  if (!mask_) {
    for (Eigen::Index i = 0; i < rows_; ++i) {
      for (Eigen::Index j = i + 1; j < cols_; ++j) {
        if (std::abs(dense_(i, j) - dense_(j, i)) > 1e-10) {
          throw std::invalid_argument("target: matrix is not symmetric");
        }
      }
    }
    return;
  }
  for (std::size_t e = 0; e < mask_->size(); ++e) {
    const Coordinate mirror{(*mask_)[e].col, (*mask_)[e].row};
    auto it = std::lower_bound(mask_->begin(), mask_->end(), mirror);
    if (it != mask_->end() && *it == mirror) {
      const double other = values_[static_cast<std::size_t>(it - mask_->begin())];
      if (std::abs(values_[e] - other) > 1e-10) {
        throw std::invalid_argument("target: observed entries are not symmetric");
      }
    }
  }
}

Matrix TargetProblem::dense_target() const {
  if (!mask_) return dense_;
  Matrix out = Matrix::Zero(rows_, cols_);
  for (std::size_t e = 0; e < mask_->size(); ++e) out((*mask_)[e].row, (*mask_)[e].col) = values_[e];
  return out;
}

double TargetProblem::target_norm() const {
  if (!mask_) return dense_.norm();
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double FactorModel::entry(Eigen::Index i, Eigen::Index j) const {
  double x = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    x += weights[static_cast<Eigen::Index>(t)] * terms[t].u.values[i] * terms[t].v.values[j];
  }
  return x;
}

Matrix FactorModel::to_dense() const {
  Matrix X(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) X(i, j) = entry(i, j);
  }
  return X;
}

FactorModel empty_model(Eigen::Index rows, Eigen::Index cols) {
  return FactorModel{{}, Vector(0), rows, cols};
}

namespace {

void check_shapes(const TargetProblem& problem, const FactorModel& model) {
  if (problem.rows() != model.rows || problem.cols() != model.cols) {
    throw std::invalid_argument("objective: model shape does not match target");
  }
  if (static_cast<Eigen::Index>(model.terms.size()) != model.weights.size()) {
    throw std::invalid_argument("objective: term/weight count mismatch");
  }
}

}  // namespace

std::vector<double> residual_values(const TargetProblem& problem, const FactorModel& model) {
  check_shapes(problem, model);
  std::vector<double> out;
  if (problem.masked()) {
    const Mask& mask = *problem.mask();
    const auto& y = problem.observed_values();
    out.resize(mask.size());
    for (std::size_t e = 0; e < mask.size(); ++e) out[e] = y[e] - model.entry(mask[e].row, mask[e].col);
    return out;
  }
  const Matrix& Y = problem.dense();
  out.reserve(static_cast<std::size_t>(Y.size()));
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    for (Eigen::Index j = 0; j < Y.cols(); ++j) out.push_back(Y(i, j) - model.entry(i, j));
  }
  return out;
}

Matrix residual(const TargetProblem& problem, const FactorModel& model) {
  const auto values = residual_values(problem, model);
  Matrix R = Matrix::Zero(problem.rows(), problem.cols());
  if (problem.masked()) {
    const Mask& mask = *problem.mask();
    for (std::size_t e = 0; e < mask.size(); ++e) R(mask[e].row, mask[e].col) = values[e];
    return R;
  }
  std::size_t e = 0;
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    for (Eigen::Index j = 0; j < R.cols(); ++j) R(i, j) = values[e++];
  }
  return R;
}

MatrixOperator residual_operator(const TargetProblem& problem, const FactorModel& model) {
  if (!problem.masked()) {
    Matrix R = residual(problem, model);
    if (problem.symmetric_mode()) R = (0.5 * (R + R.transpose())).eval();
    return MatrixOperator(std::move(R));
  }
  const auto values = residual_values(problem, model);
  const Mask& mask = *problem.mask();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mask.size());
  for (std::size_t e = 0; e < mask.size(); ++e) trip.emplace_back(mask[e].row, mask[e].col, values[e]);
  SparseMatrix R(problem.rows(), problem.cols());
  R.setFromTriplets(trip.begin(), trip.end());
  if (problem.symmetric_mode()) {
    SparseMatrix Rt = R.transpose();
    R = 0.5 * (R + Rt);
  }
  return MatrixOperator(std::move(R));
}

double cost(const TargetProblem& problem, const FactorModel& model) {
  double s = 0.0;
  for (double r : residual_values(problem, model)) s += r * r;
  return 0.5 * s;
}

double inner_omega(const Matrix& A, const Matrix& B, const std::optional<Mask>& mask) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw std::invalid_argument("inner_omega: shape mismatch");
  }
  double s = 0.0;
  if (mask) {
    for (const auto& c : *mask) s += A(c.row, c.col) * B(c.row, c.col);
    return s;
  }
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) s += A(i, j) * B(i, j);
  }
  return s;
}

}  // namespace gmp
