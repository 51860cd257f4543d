#pragma once

#include <vector>

#include "gmp/objective.hpp"

namespace gmp {

struct FitMetrics {
  double cost = 0.0;                      // 1/2 ||Y - X||^2_Omega
  double reconstruction_error = 0.0;      // ||Y - X||_Omega
  double explained_variance_ratio = 0.0;  // 1 - ||Y - X||^2_Omega / ||Y||^2_Omega
};

FitMetrics evaluate_fit(const TargetProblem& problem, const FactorModel& model);

/// sqrt(mean over entries of (y - X_ij)^2). NaN for an empty entry set.
double rmse(const FactorModel& model, const std::vector<Coordinate>& coords, const std::vector<double>& values);

}  // namespace gmp
