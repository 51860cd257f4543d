#pragma once

#include <cstdint>
#include <random>

#include "gmp/atomset.hpp"
#include "gmp/objective.hpp"

namespace gmp::testing {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gaussian(rows, cols, rng);
}

inline Matrix symmetric_gaussian(Eigen::Index n, std::uint64_t seed) {
  const Matrix A = gaussian(n, n, seed);
  return 0.5 * (A + A.transpose());
}

inline Vector unit(Vector v) { return v / v.norm(); }

/// Random valid member of the set (not uniform), for sampled maximality checks.
inline VectorAtom sample_member(const AtomSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, spec.dimension - 1);
  Vector u = Vector::Zero(static_cast<Eigen::Index>(spec.dimension));
  const std::size_t nnz = spec.is_sparse() ? spec.k : spec.dimension;
  for (std::size_t t = 0; t < nnz; ++t) {
    const auto j = static_cast<Eigen::Index>(spec.is_sparse() ? pick(rng) : t);
    u[j] = spec.is_non_negative() ? std::abs(normal(rng)) : normal(rng);
  }
  if (u.norm() == 0.0) u[0] = 1.0;
  return VectorAtom{u / u.norm(), spec};
}

inline std::vector<Coordinate> random_mask(Eigen::Index rows, Eigen::Index cols, double fraction,
                                           std::mt19937_64& rng) {
  std::bernoulli_distribution keep(fraction);
  std::vector<Coordinate> out;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (keep(rng)) out.push_back({i, j});
    }
  }
  if (out.empty()) out.push_back({0, 0});
  return out;
}

}  // namespace gmp::testing
