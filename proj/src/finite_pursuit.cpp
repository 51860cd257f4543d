#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "gmp/pursuit.hpp"

namespace gmp {

FiniteDictionary FiniteDictionary::from_columns(Matrix columns, bool normalize) {
  if (columns.cols() == 0 || columns.rows() == 0) throw std::invalid_argument("dictionary: no atoms");
  if (normalize) {
    for (Eigen::Index i = 0; i < columns.cols(); ++i) {
      const double n = columns.col(i).norm();
      if (!(n > 0.0)) throw std::invalid_argument("dictionary: zero atom " + std::to_string(i));
      columns.col(i) /= n;
    }
  }
  bool unit = true;
  for (Eigen::Index i = 0; i < columns.cols(); ++i) {
    unit = unit && std::abs(columns.col(i).norm() - 1.0) <= 1e-12;
  }
  return FiniteDictionary{std::move(columns), unit};
}

FiniteFit gp_fit_finite(const Vector& y, const FiniteDictionary& dict, const PursuitConfig& config,
                        SelectionMode mode) {
  config.check();
  if (dict.size() == 0) throw std::invalid_argument("gp_fit_finite: empty dictionary");
  if (y.size() != dict.ambient_dimension()) {
    throw std::invalid_argument("gp_fit_finite: signal and dictionary dimensions differ");
  }

  FiniteFit fit;
  fit.coefficients = Vector(0);
  Vector r = y;
  fit.trace.initial_cost = 0.5 * r.squaredNorm();
  const double floor = 1e-14 * (1.0 + y.norm());
  const Vector atom_norm_sq = dict.atoms.colwise().squaredNorm().transpose();

  for (int step = 1; step <= config.max_rank; ++step) {
    const Vector corr = dict.atoms.transpose() * r;
    Eigen::Index best = 0;
    double score = 0.0;
    if (mode == SelectionMode::Signed) {
      score = corr.cwiseAbs().maxCoeff(&best);
    } else {
      score = corr.maxCoeff(&best);
    }
    if (score <= floor) {
      fit.trace.stop_reason = StopReason::LmoOptimal;
      break;
    }

    auto pos = std::find(fit.indices.begin(), fit.indices.end(), best);
    if (pos == fit.indices.end()) {
      fit.indices.push_back(best);
      fit.coefficients.conservativeResize(fit.coefficients.size() + 1);
      fit.coefficients[fit.coefficients.size() - 1] = 0.0;
      pos = fit.indices.end() - 1;
    }

    TraceRecord rec;
    rec.iteration = step;
    rec.lmo_value = corr[best];

    if (config.weight_mode == WeightMode::FullRefit) {
      Matrix selected(dict.ambient_dimension(), static_cast<Eigen::Index>(fit.indices.size()));
      for (std::size_t i = 0; i < fit.indices.size(); ++i) {
        selected.col(static_cast<Eigen::Index>(i)) = dict.atoms.col(fit.indices[i]);
      }
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(selected);
      fit.coefficients = cod.solve(y);
      rec.rank_deficient = cod.rank() < selected.cols();
      r = y - selected * fit.coefficients;
    } else {
      const double step_coef = corr[best] / atom_norm_sq[best];
      fit.coefficients[pos - fit.indices.begin()] += step_coef;
      r -= step_coef * dict.atoms.col(best);
    }

    rec.cost = 0.5 * r.squaredNorm();
    rec.residual_norm = r.norm();
    rec.weights = fit.coefficients;
    fit.trace.records.push_back(rec);
    if (rec.cost <= config.stop_tolerance * fit.trace.initial_cost) {
      fit.trace.stop_reason = StopReason::Tolerance;
      break;
    }
  }
  return fit;
}

namespace {

// Row k: |<s_k, s_i>| for i != k, sorted descending.
std::vector<std::vector<double>> sorted_abs_correlations(const FiniteDictionary& dict) {
  const Matrix gram = (dict.atoms.transpose() * dict.atoms).cwiseAbs();
  const Eigen::Index n = gram.rows();
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& row = rows[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != k) row.push_back(gram(k, i));
    }
    std::sort(row.begin(), row.end(), std::greater<>());
  }
  return rows;
}

void check_coherence_input(const FiniteDictionary& dict) {
  if (!dict.normalized) throw std::invalid_argument("coherence: dictionary atoms must be unit norm");
  if (dict.size() < 2) throw std::invalid_argument("coherence: need at least two atoms");
}

}  // namespace

double cumulative_coherence(const FiniteDictionary& dict, int m) {
  check_coherence_input(dict);
  if (m < 1 || m > dict.size() - 1) {
    throw std::invalid_argument("coherence: m=" + std::to_string(m) + " outside [1, " +
                                std::to_string(dict.size() - 1) + "]");
  }
  double best = 0.0;
  for (const auto& row : sorted_abs_correlations(dict)) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += row[static_cast<std::size_t>(i)];
    best = std::max(best, s);
  }
  return best;
}

CoherenceProfile coherence_profile(const FiniteDictionary& dict) {
  check_coherence_input(dict);
  const auto rows = sorted_abs_correlations(dict);
  const Eigen::Index n = dict.size();
  CoherenceProfile out{Vector::Zero(n - 1)};
  for (const auto& row : rows) {
    double s = 0.0;
    for (Eigen::Index m = 1; m < n; ++m) {
      s += row[static_cast<std::size_t>(m - 1)];
      out.mu[m - 1] = std::max(out.mu[m - 1], s);
    }
  }
  return out;
}

}  // namespace gmp
