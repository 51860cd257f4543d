#include "gmp/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmp {

FitMetrics evaluate_fit(const TargetProblem& problem, const FactorModel& model) {
  FitMetrics m;
  m.cost = cost(problem, model);
  m.reconstruction_error = std::sqrt(2.0 * m.cost);
  const double target_sq = problem.target_norm() * problem.target_norm();
  m.explained_variance_ratio = target_sq > 0.0 ? 1.0 - 2.0 * m.cost / target_sq : 0.0;
  return m;
}

double rmse(const FactorModel& model, const std::vector<Coordinate>& coords, const std::vector<double>& values) {
  if (coords.size() != values.size()) throw std::invalid_argument("rmse: coordinate/value length mismatch");
  if (coords.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (std::size_t e = 0; e < coords.size(); ++e) {
    const double r = values[e] - model.entry(coords[e].row, coords[e].col);
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(coords.size()));
}

}  // namespace gmp
