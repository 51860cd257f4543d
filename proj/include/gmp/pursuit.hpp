#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "gmp/atomset.hpp"
#include "gmp/objective.hpp"
#include "gmp/power.hpp"

namespace gmp {

enum class WeightMode {
  FullRefit,      // re-solve all weights each iteration (OMP-style)
  NewWeightOnly,  // only the newest weight is fitted (MP-style)
};

enum class StopReason { MaxRank, Tolerance, LmoOptimal, LmoFailure };
std::string_view to_string(StopReason reason);

struct PursuitConfig {
  int max_rank = 10;
  PowerConfig power;
  WeightMode weight_mode = WeightMode::FullRefit;
  int correction_passes = 0;  // 0 disables atom corrections
  double stop_tolerance = 0.0;  // relative to the initial cost
  std::uint64_t seed = 0;
  /// Oracle accuracy; values below 1 degrade every LMO answer to at least
  /// delta times its value (for studying inexact oracles).
  double delta = 1.0;

  void check() const;
};

struct TraceRecord {
  int iteration = 0;
  double cost = 0.0;
  double residual_norm = 0.0;
  double lmo_value = 0.0;  // <R_{r-1}, u_r v_r'>_Omega
  double lmo_gap = 0.0;
  int corrections_applied = 0;
  bool rank_deficient = false;
  Vector weights;
};

struct PursuitTrace {
  double initial_cost = 0.0;
  std::vector<TraceRecord> records;
  StopReason stop_reason = StopReason::MaxRank;
  /// The oracle failed before any atom was chosen: the target is ~0.
  bool lmo_failure_at_start = false;
};

struct WeightFit {
  Vector weights;
  bool rank_deficient = false;
};

/// Weights minimizing 1/2 ||Y - sum_i a_i u_i v_i'||^2_Omega over the given
/// terms, from the r x r Gram system. Gram matrices with condition number
/// above 1e12 are solved in the minimum-norm least-squares sense instead.
WeightFit refit_weights(const TargetProblem& problem, const std::vector<RankOneTerm>& terms);

/// Gram matrix <Z_i, Z_j>_Omega and right-hand side <Z_i, Y>_Omega.
std::pair<Matrix, Vector> gram_system(const TargetProblem& problem,
                                      const std::vector<RankOneTerm>& terms);

struct CorrectionResult {
  FactorModel model;
  int accepted = 0;
};

/// Cyclic atom corrections. For each pass and each term in selection order,
/// re-solve the oracle on the residual that leaves that term out, and keep
/// the replacement only if the refit cost drops by more than 1e-12. The
/// cost never increases.
CorrectionResult correct_atoms(const TargetProblem& problem, const FactorModel& model,
                               const AtomSpec& spec_u, const AtomSpec& spec_v,
                               const PowerConfig& power_config, int passes);

using IterationObserver = std::function<void(const FactorModel&, const TraceRecord&)>;

/// Greedy rank-one pursuit over the product atom set spec_u x spec_v.
/// In symmetric mode spec_v is ignored and every term has v = u.
std::pair<FactorModel, PursuitTrace> gmp_fit(const TargetProblem& problem, const AtomSpec& spec_u,
                                             const AtomSpec& spec_v, const PursuitConfig& config,
                                             const IterationObserver& observer = {});

// Finite dictionaries ------------------------------------------------------

struct FiniteDictionary {
  Matrix atoms;  // one atom per column
  bool normalized = false;

  /// Columns are normalized when `normalize` is set; `normalized` records
  /// whether every column ends up with unit norm.
  static FiniteDictionary from_columns(Matrix columns, bool normalize);
  Eigen::Index size() const { return atoms.cols(); }
  Eigen::Index ambient_dimension() const { return atoms.rows(); }
};

enum class SelectionMode {
  Signed,  // argmax |<s, r>|, sign absorbed into the weight
  Max,     // argmax <s, r>
};

struct FiniteFit {
  std::vector<Eigen::Index> indices;  // distinct atoms, first-selection order
  Vector coefficients;                // aligned with indices
  PursuitTrace trace;
};

/// Pursuit over a finite dictionary: OMP with FullRefit, MP with
/// NewWeightOnly.
FiniteFit gp_fit_finite(const Vector& y, const FiniteDictionary& dict, const PursuitConfig& config,
                        SelectionMode mode);

/// mu(m) = max_{|I| = m} max_{k not in I} sum_{i in I} |<s_k, s_i>|.
double cumulative_coherence(const FiniteDictionary& dict, int m);

struct CoherenceProfile {
  Vector mu;  // mu[m-1] = mu(m), m = 1..n-1

  double at(int m) const { return m == 0 ? 0.0 : mu[m - 1]; }
  /// 1 - (1 - mu(m-1)) / m
  double rate_bound(int m) const { return 1.0 - (1.0 - at(m - 1)) / m; }
};

CoherenceProfile coherence_profile(const FiniteDictionary& dict);

}  // namespace gmp
