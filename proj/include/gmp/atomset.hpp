#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a linear maximization has no informative direction
/// (zero or non-finite input). Power iterations re-initialize on it.
class DegenerateDirection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Constraint { UnitSphere, Sparse, NonNegative, SparseNonNegative };

/// Declarative description of a structured set of unit-norm vectors.
///
/// Every supported set lies on the unit sphere, so u'u is constant over
/// the set. The atomic power method relies on that to shift its objective.
/// New structures (group sparsity, ordered vectors) only need a new
/// Constraint value and a branch in linear_argmax / validate_atom.
struct AtomSpec {
  std::size_t dimension = 0;
  Constraint constraint = Constraint::UnitSphere;
  std::size_t k = 0;  // support bound; only meaningful for sparse variants

  static AtomSpec unit_sphere(std::size_t dim);
  static AtomSpec sparse(std::size_t dim, std::size_t k);
  static AtomSpec non_negative(std::size_t dim);
  static AtomSpec sparse_non_negative(std::size_t dim, std::size_t k);

  bool is_sparse() const {
    return constraint == Constraint::Sparse || constraint == Constraint::SparseNonNegative;
  }
  bool is_non_negative() const {
    return constraint == Constraint::NonNegative || constraint == Constraint::SparseNonNegative;
  }

  /// Throws std::invalid_argument if dimension or k is out of range.
  void check() const;

  /// Short textual form, e.g. "sparse(12,3)". Parsed back by parse().
  std::string to_string() const;
  static AtomSpec parse(const std::string& text);

  friend bool operator==(const AtomSpec&, const AtomSpec&) = default;
};

struct VectorAtom {
  Vector values;
  AtomSpec spec;
};

/// Exact maximizer of <u, w> over the atom set described by `spec`.
///
/// Ties in the top-k selection go to the lowest index. Under a
/// non-negativity constraint with no positive entry in w the single basis
/// vector at argmax_j w_j is returned. Throws DegenerateDirection when w
/// is zero, non-finite, or selects an all-zero support.
VectorAtom linear_argmax(const AtomSpec& spec, const Eigen::Ref<const Vector>& w);

/// True iff the atom satisfies unit norm, support and sign constraints of
/// its spec within `tolerance`.
bool validate_atom(const VectorAtom& atom, double tolerance = 1e-10);

}  // namespace gmp
