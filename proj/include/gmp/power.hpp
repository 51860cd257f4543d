#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gmp/atomset.hpp"
#include "gmp/matrix_operator.hpp"

namespace gmp {

/// All restarts of the rank-one oracle degenerated: the residual carries
/// no signal that the atom sets can pick up.
class LmoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KappaPolicy { None, Auto };
enum class NonSymmetricStrategy { Alternating, SymmetricEmbedding };

struct PowerConfig {
  int max_iterations = 250;
  double gap_tolerance = 1e-8;  // stop once gap <= gap_tolerance * |objective|
  KappaPolicy kappa_policy = KappaPolicy::Auto;
  int restarts = 5;
  std::uint64_t seed = 0;
  NonSymmetricStrategy strategy = NonSymmetricStrategy::Alternating;

  void check() const;
};

struct PowerResult {
  VectorAtom atom_u;
  VectorAtom atom_v;  // equals atom_u in symmetric mode
  double value = 0.0;  // <R, u v'>, never shifted
  int iterations_used = 0;
  double final_gap = 0.0;
  std::vector<double> value_trace;
  bool converged = false;
};

/// Shift that makes u -> u'(R + kappa I)u convex on the hull of any
/// unit-norm atom set: ||R||_F bounds -lambda_min(R) from above.
double auto_kappa(const MatrixOperator& R);

/// Atomic power iteration u <- argmax_{u in A} <u, (R + kappa I) u_t> on a
/// symmetric R. Reported values are u'Ru without the shift.
PowerResult atomic_power_symmetric(const MatrixOperator& R, const AtomSpec& spec,
                                   const VectorAtom& init, const PowerConfig& config);

/// Rank-one oracle for a rectangular R, either by alternating exact block
/// maximizations or by the symmetric power method on [0 R; R' 0] over the
/// product atom set.
PowerResult atomic_power_nonsymmetric(const MatrixOperator& R, const AtomSpec& spec_u,
                                      const AtomSpec& spec_v,
                                      const std::pair<VectorAtom, VectorAtom>& init,
                                      const PowerConfig& config,
                                      NonSymmetricStrategy strategy);

/// Multi-restart driver. Restart 0 starts from the row of R with the
/// largest norm, projected onto the atom set; the rest start from seeded
/// Gaussian directions. `extra_inits` are run after those as additional
/// starts (used by atom corrections to warm-start from the current atom).
/// The largest value wins, ties go to the earliest start.
///
/// spec_v == nullopt selects the symmetric problem (v = u).
PowerResult lmo(const MatrixOperator& R, const AtomSpec& spec_u,
                const std::optional<AtomSpec>& spec_v, const PowerConfig& config,
                const std::vector<std::pair<VectorAtom, VectorAtom>>& extra_inits = {});

/// Produce an atom pair whose value lies in [delta * exact, exact] by
/// blending the exact atoms with random valid atoms and re-projecting.
/// Models an inexact oracle with multiplicative accuracy delta.
PowerResult degrade_lmo(const PowerResult& exact, double delta, const MatrixOperator& R,
                        const AtomSpec& spec_u, const std::optional<AtomSpec>& spec_v,
                        std::uint64_t seed);

/// Random valid atom: standard normal direction passed through linear_argmax.
VectorAtom random_atom(const AtomSpec& spec, std::mt19937_64& rng);

}  // namespace gmp
