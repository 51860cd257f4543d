#include "gmp/pursuit.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace gmp {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxRank: return "max-rank";
    case StopReason::Tolerance: return "tolerance";
    case StopReason::LmoOptimal: return "lmo-optimal";
    case StopReason::LmoFailure: return "lmo-failure";
  }
  return "unknown";
}

void PursuitConfig::check() const {
  if (max_rank < 1) throw std::invalid_argument("pursuit: max_rank must be >= 1");
  if (correction_passes < 0) throw std::invalid_argument("pursuit: correction passes must be >= 0");
  if (!(stop_tolerance >= 0.0)) throw std::invalid_argument("pursuit: stop_tolerance must be >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("pursuit: delta must be in (0, 1]");
  power.check();
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return splitmix(splitmix(splitmix(splitmix(seed) ^ a) ^ b) ^ c);
}

// Values of u_i v_j on the observed coordinates.
Vector term_on_mask(const Mask& mask, const RankOneTerm& term) {
  Vector z(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t e = 0; e < mask.size(); ++e) {
    z[static_cast<Eigen::Index>(e)] = term.u.values[mask[e].row] * term.v.values[mask[e].col];
  }
  return z;
}

double term_norm_sq(const TargetProblem& problem, const RankOneTerm& term) {
  if (problem.masked()) return term_on_mask(*problem.mask(), term).squaredNorm();
  return term.u.values.squaredNorm() * term.v.values.squaredNorm();
}

// <R, u v'>_Omega from residual values laid out as residual_values() does.
double residual_dot_term(const TargetProblem& problem, const std::vector<double>& r,
                         const RankOneTerm& term) {
  double s = 0.0;
  if (problem.masked()) {
    const Mask& mask = *problem.mask();
    for (std::size_t e = 0; e < mask.size(); ++e) {
      s += r[e] * term.u.values[mask[e].row] * term.v.values[mask[e].col];
    }
    return s;
  }
  const Eigen::Index m = problem.cols();
  for (Eigen::Index i = 0; i < problem.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) row += r[static_cast<std::size_t>(i * m + j)] * term.v.values[j];
    s += term.u.values[i] * row;
  }
  return s;
}

FactorModel with_terms(const FactorModel& base, std::vector<RankOneTerm> terms, Vector weights) {
  FactorModel out{std::move(terms), std::move(weights), base.rows, base.cols};
  return out;
}

}  // namespace

std::pair<Matrix, Vector> gram_system(const TargetProblem& problem,
                                      const std::vector<RankOneTerm>& terms) {
  const auto r = static_cast<Eigen::Index>(terms.size());
  Matrix G(r, r);
  Vector b(r);
  if (problem.masked()) {
    const Mask& mask = *problem.mask();
    Matrix Z(static_cast<Eigen::Index>(mask.size()), r);
    for (Eigen::Index i = 0; i < r; ++i) Z.col(i) = term_on_mask(mask, terms[static_cast<std::size_t>(i)]);
    const auto& y = problem.observed_values();
    const Eigen::Map<const Vector> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    G = Z.transpose() * Z;
    b = Z.transpose() * yv;
    return {G, b};
  }
  const Matrix& Y = problem.dense();
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& ti = terms[static_cast<std::size_t>(i)];
    b[i] = ti.u.values.dot(Y * ti.v.values);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto& tj = terms[static_cast<std::size_t>(j)];
      G(i, j) = G(j, i) = ti.u.values.dot(tj.u.values) * ti.v.values.dot(tj.v.values);
    }
  }
  return {G, b};
}

WeightFit refit_weights(const TargetProblem& problem, const std::vector<RankOneTerm>& terms) {
  if (terms.empty()) throw std::invalid_argument("refit_weights: no terms");
  auto [G, b] = gram_system(problem, terms);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double lmax = lambda[lambda.size() - 1];
  WeightFit fit;
  if (!(lmax > 0.0)) {
    fit.weights = Vector::Zero(b.size());
    fit.rank_deficient = true;
    return fit;
  }
  if (lambda[0] * 1e12 > lmax) {
    Eigen::LDLT<Matrix> ldlt(G);
    fit.weights = ldlt.solve(b);
    // one refinement step keeps the gradient on the chosen span at rounding level
    fit.weights += ldlt.solve(b - G * fit.weights);
    return fit;
  }
  // Minimum-norm least squares through the pseudo-inverse of G.
  fit.rank_deficient = true;
  const Matrix& Q = eig.eigenvectors();
  const double cutoff = lmax * 1e-12;
  Vector coef = Q.transpose() * b;
  for (Eigen::Index k = 0; k < coef.size(); ++k) coef[k] = lambda[k] > cutoff ? coef[k] / lambda[k] : 0.0;
  fit.weights = Q * coef;
  return fit;
}

CorrectionResult correct_atoms(const TargetProblem& problem, const FactorModel& model,
                               const AtomSpec& spec_u, const AtomSpec& spec_v,
                               const PowerConfig& power_config, int passes) {
  if (passes < 0) throw std::invalid_argument("correct_atoms: passes must be >= 0");
  CorrectionResult out{model, 0};
  if (passes == 0) return out;
  if (model.terms.empty()) throw std::invalid_argument("correct_atoms: empty model");

  const bool symmetric = problem.symmetric_mode();
  const std::optional<AtomSpec> lmo_spec_v = symmetric ? std::nullopt : std::optional<AtomSpec>(spec_v);
  double current = cost(problem, out.model);

  for (int pass = 0; pass < passes; ++pass) {
    for (std::size_t i = 0; i < out.model.terms.size(); ++i) {
      std::vector<RankOneTerm> others;
      Vector other_w(static_cast<Eigen::Index>(out.model.terms.size() - 1));
      for (std::size_t j = 0, k = 0; j < out.model.terms.size(); ++j) {
        if (j == i) continue;
        others.push_back(out.model.terms[j]);
        other_w[static_cast<Eigen::Index>(k++)] = out.model.weights[static_cast<Eigen::Index>(j)];
      }
      const FactorModel partial = with_terms(out.model, std::move(others), std::move(other_w));

      PowerConfig pc = power_config;
      pc.seed = derive_seed(power_config.seed, 0xC0, static_cast<std::uint64_t>(pass), i);
      const auto& cur = out.model.terms[i];
      PowerResult proposal;
      try {
        proposal = lmo(residual_operator(problem, partial), spec_u, lmo_spec_v, pc, {{cur.u, cur.v}});
      } catch (const LmoFailure&) {
        continue;
      }

      std::vector<RankOneTerm> candidate = out.model.terms;
      candidate[i] = RankOneTerm{proposal.atom_u, symmetric ? proposal.atom_u : proposal.atom_v};
      WeightFit fit = refit_weights(problem, candidate);
      FactorModel trial = with_terms(out.model, std::move(candidate), std::move(fit.weights));
      const double trial_cost = cost(problem, trial);
      if (trial_cost <= current - 1e-12) {
        out.model = std::move(trial);
        current = trial_cost;
        ++out.accepted;
      }
    }
  }
  return out;
}

std::pair<FactorModel, PursuitTrace> gmp_fit(const TargetProblem& problem, const AtomSpec& spec_u,
                                             const AtomSpec& spec_v, const PursuitConfig& config,
                                             const IterationObserver& observer) {
  config.check();
  const bool symmetric = problem.symmetric_mode();
  if (static_cast<Eigen::Index>(spec_u.dimension) != problem.rows() ||
      (!symmetric && static_cast<Eigen::Index>(spec_v.dimension) != problem.cols())) {
    throw std::invalid_argument("gmp_fit: atom dimensions do not match the target shape");
  }
  const std::optional<AtomSpec> lmo_spec_v = symmetric ? std::nullopt : std::optional<AtomSpec>(spec_v);
  const AtomSpec& term_spec_v = symmetric ? spec_u : spec_v;

  FactorModel model = empty_model(problem.rows(), problem.cols());
  PursuitTrace trace;
  trace.initial_cost = cost(problem, model);
  const double optimality_floor = 1e-14 * (1.0 + problem.target_norm());

  for (int r = 1; r <= config.max_rank; ++r) {
    const auto residual_vals = residual_values(problem, model);
    PowerConfig pc = config.power;
    pc.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));

    PowerResult found;
    try {
      const MatrixOperator R = residual_operator(problem, model);
      found = lmo(R, spec_u, lmo_spec_v, pc);
      if (config.delta < 1.0 && found.value > 0.0) {
        found = degrade_lmo(found, config.delta, R, spec_u, lmo_spec_v,
                            derive_seed(config.seed, static_cast<std::uint64_t>(r), 0xDE));
      }
    } catch (const LmoFailure&) {
      // A vanished residual after the first step is the optimum, not a failure.
      double rr = 0.0;
      for (double v : residual_vals) rr += v * v;
      const bool solved = r > 1 && std::sqrt(rr) <= optimality_floor;
      trace.stop_reason = solved ? StopReason::LmoOptimal : StopReason::LmoFailure;
      trace.lmo_failure_at_start = (r == 1);
      break;
    }

    RankOneTerm term{found.atom_u, symmetric ? found.atom_u : found.atom_v};
    term.v.spec = term_spec_v;
    const double lmo_value = residual_dot_term(problem, residual_vals, term);
    if (lmo_value <= optimality_floor) {
      trace.stop_reason = StopReason::LmoOptimal;
      break;
    }

    TraceRecord rec;
    rec.iteration = r;
    rec.lmo_value = lmo_value;
    rec.lmo_gap = found.final_gap;

    if (config.weight_mode == WeightMode::FullRefit) {
      model.terms.push_back(std::move(term));
      WeightFit fit = refit_weights(problem, model.terms);
      model.weights = std::move(fit.weights);
      rec.rank_deficient = fit.rank_deficient;
    } else {
      const double alpha = lmo_value / term_norm_sq(problem, term);
      model.terms.push_back(std::move(term));
      model.weights.conservativeResize(model.weights.size() + 1);
      model.weights[model.weights.size() - 1] = alpha;
    }

    if (config.correction_passes > 0) {
      PowerConfig cpc = config.power;
      cpc.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r), 0xC0);
      CorrectionResult corrected =
          correct_atoms(problem, model, spec_u, term_spec_v, cpc, config.correction_passes);
      model = std::move(corrected.model);
      rec.corrections_applied = corrected.accepted;
    }

    rec.cost = cost(problem, model);
    rec.residual_norm = std::sqrt(2.0 * rec.cost);
    rec.weights = model.weights;
    trace.records.push_back(rec);
    if (observer) observer(model, trace.records.back());

    if (config.stop_tolerance > 0.0 && rec.cost <= config.stop_tolerance * trace.initial_cost) {
      trace.stop_reason = StopReason::Tolerance;
      break;
    }
  }
  return {std::move(model), std::move(trace)};
}

}  // namespace gmp
