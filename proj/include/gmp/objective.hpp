#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gmp/atomset.hpp"
#include "gmp/matrix_operator.hpp"

namespace gmp {

struct Coordinate {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  friend auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

/// Observed entry set Omega, kept as a row-major sorted coordinate list.
using Mask = std::vector<Coordinate>;

/// Least-squares target: Y, optionally observed only on Omega.
///
/// Fully observed problems keep Y dense. Masked problems keep only the
/// observed values (aligned with the sorted mask), so completion targets
/// never need a dense n x m buffer.
class TargetProblem {
 public:
  /// Fully observed target.
  explicit TargetProblem(Matrix Y, bool symmetric_mode = false);

  /// Target observed on `mask`; entries of Y outside the mask are ignored.
  TargetProblem(const Matrix& Y, Mask mask, bool symmetric_mode = false);

  /// Target given as coordinate triples. Coordinates must be unique.
  TargetProblem(Eigen::Index rows, Eigen::Index cols, Mask mask, std::vector<double> values,
                bool symmetric_mode = false);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  bool masked() const { return mask_.has_value(); }
  bool symmetric_mode() const { return symmetric_; }

  /// Observed coordinates; nullopt for fully observed problems.
  const std::optional<Mask>& mask() const { return mask_; }
  /// Observed values aligned with mask(). Empty when fully observed.
  const std::vector<double>& observed_values() const { return values_; }
  /// Dense target, unobserved entries as 0. Materializes for masked problems.
  Matrix dense_target() const;
  const Matrix& dense() const { return dense_; }

  /// ||Y||_Omega
  double target_norm() const;

 private:
  void validate_mask_and_symmetry();

  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Matrix dense_;  // fully observed only
  std::optional<Mask> mask_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

struct RankOneTerm {
  VectorAtom u;
  VectorAtom v;
};

/// X = sum_i weights[i] * u_i v_i'.
struct FactorModel {
  std::vector<RankOneTerm> terms;
  Vector weights;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  std::size_t rank() const { return terms.size(); }
  /// X_ij, accumulated over terms in order.
  double entry(Eigen::Index i, Eigen::Index j) const;
  Matrix to_dense() const;
};

FactorModel empty_model(Eigen::Index rows, Eigen::Index cols);

/// Y - X restricted to Omega (zero elsewhere). Equals the negative gradient
/// of cost().
Matrix residual(const TargetProblem& problem, const FactorModel& model);

/// Residual in the form the power methods consume: dense for fully
/// observed problems, sparse on Omega otherwise. In symmetric mode the
/// masked residual is symmetrized, which leaves u'Ru unchanged.
MatrixOperator residual_operator(const TargetProblem& problem, const FactorModel& model);

/// Residual values on Omega, aligned with the mask (row-major order of all
/// entries when fully observed).
std::vector<double> residual_values(const TargetProblem& problem, const FactorModel& model);

/// 1/2 * ||Y - X||^2_Omega
double cost(const TargetProblem& problem, const FactorModel& model);

/// <A, B>_Omega; all entries when mask is empty.
double inner_omega(const Matrix& A, const Matrix& B, const std::optional<Mask>& mask = std::nullopt);

/// Sort a coordinate list and reject out-of-range or duplicate entries.
Mask make_mask(std::vector<Coordinate> coords, Eigen::Index rows, Eigen::Index cols);

}  // namespace gmp
