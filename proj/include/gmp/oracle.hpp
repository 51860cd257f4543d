#pragma once

#include <vector>

#include "gmp/atomset.hpp"

// Brute-force references for tests. Production code never links these.
namespace gmp::oracle {

enum class Method { SupportEnumeration, GridSearch, DenseSVD };

struct OracleResult {
  double value = 0.0;
  VectorAtom atom_u;
  VectorAtom atom_v;
  Method method = Method::SupportEnumeration;
  double resolution = 0.0;  // grid step in radians; 0 for exact methods
};

/// Angular step of the non-negative grids.
inline constexpr double kGridStep = 0.01;

/// max u'Ru over the atom set. Exact (eigensolve per support) for sphere
/// and sparse sets up to dimension 12; grid search over the non-negative
/// orthant for non-negative sets up to dimension 5.
OracleResult brute_lmo_symmetric(const Matrix& R, const AtomSpec& spec);

/// max u'Rv over A_u x A_v. Exact via the top singular pair of every
/// support-restricted block when neither set is non-negative; otherwise a
/// grid over one non-negative factor (dimension <= 4) with the other
/// factor maximized in closed form.
OracleResult brute_lmo_nonsymmetric(const Matrix& R, const AtomSpec& spec_u, const AtomSpec& spec_v);

/// Eckart-Young costs 1/2 * sum_{i > r} sigma_i^2 for r = 1..rank.
std::vector<double> svd_reference(const Matrix& Y, int rank);

/// mu(m) by enumerating every index set of size m.
double exhaustive_coherence(const Matrix& unit_atoms, int m);

}  // namespace gmp::oracle
