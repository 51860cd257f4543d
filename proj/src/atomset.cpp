#include "gmp/atomset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace gmp {

AtomSpec AtomSpec::unit_sphere(std::size_t dim) {
  AtomSpec s{dim, Constraint::UnitSphere, 0};
  s.check();
  return s;
}

AtomSpec AtomSpec::sparse(std::size_t dim, std::size_t k) {
  AtomSpec s{dim, Constraint::Sparse, k};
  s.check();
  return s;
}

AtomSpec AtomSpec::non_negative(std::size_t dim) {
  AtomSpec s{dim, Constraint::NonNegative, 0};
  s.check();
  return s;
}

AtomSpec AtomSpec::sparse_non_negative(std::size_t dim, std::size_t k) {
  AtomSpec s{dim, Constraint::SparseNonNegative, k};
  s.check();
  return s;
}

void AtomSpec::check() const {
  if (dimension == 0) throw std::invalid_argument("atom dimension must be positive");
  if (is_sparse() && (k < 1 || k > dimension)) {
    throw std::invalid_argument("sparsity k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(dimension) + "]");
  }
}

std::string AtomSpec::to_string() const {
  std::ostringstream os;
  switch (constraint) {
    case Constraint::UnitSphere: os << "sphere(" << dimension << ")"; break;
    case Constraint::Sparse: os << "sparse(" << dimension << "," << k << ")"; break;
    case Constraint::NonNegative: os << "nonneg(" << dimension << ")"; break;
    case Constraint::SparseNonNegative: os << "sparse-nonneg(" << dimension << "," << k << ")"; break;
  }
  return os.str();
}

AtomSpec AtomSpec::parse(const std::string& text) {
  auto open = text.find('(');
  auto close = text.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw std::invalid_argument("malformed atom spec '" + text + "'");
  }
  std::string name = text.substr(0, open);
  std::string args = text.substr(open + 1, close - open - 1);
  std::size_t dim = 0, k = 0;
  auto comma = args.find(',');
  try {
    dim = std::stoul(args.substr(0, comma));
    if (comma != std::string::npos) k = std::stoul(args.substr(comma + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed atom spec '" + text + "'");
  }
  if (name == "sphere") return unit_sphere(dim);
  if (name == "sparse") return sparse(dim, k);
  if (name == "nonneg") return non_negative(dim);
  if (name == "sparse-nonneg") return sparse_non_negative(dim, k);
  throw std::invalid_argument("unknown atom set '" + name + "'");
}

namespace {

// Indices of the `count` largest keys, stable so the lowest index wins ties.
std::vector<Eigen::Index> top_indices(const Vector& keys, std::size_t count) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(keys.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return keys[a] > keys[b]; });
  idx.resize(std::min(count, idx.size()));
  return idx;
}

Vector normalized_or_throw(Vector u) {
  const double norm = u.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateDirection("linear_argmax: selected support carries no signal");
  }
  return u / norm;
}

Vector basis_at_max(const Vector& w) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < w.size(); ++j) {
    if (w[j] > w[best]) best = j;
  }
  Vector e = Vector::Zero(w.size());
  e[best] = 1.0;
  return e;
}

}  // namespace

VectorAtom linear_argmax(const AtomSpec& spec, const Eigen::Ref<const Vector>& w) {
  if (static_cast<std::size_t>(w.size()) != spec.dimension) {
    throw std::invalid_argument("linear_argmax: direction has length " + std::to_string(w.size()) +
                                ", atom set has dimension " + std::to_string(spec.dimension));
  }
  if (!w.allFinite()) throw DegenerateDirection("linear_argmax: non-finite direction");
  if (w.isZero(0.0)) throw DegenerateDirection("linear_argmax: zero direction");

  const Eigen::Index n = w.size();
  Vector u = Vector::Zero(n);

  switch (spec.constraint) {
    case Constraint::UnitSphere:
      u = normalized_or_throw(w);
      break;

    case Constraint::Sparse: {
      Vector mag = w.cwiseAbs();
      for (Eigen::Index j : top_indices(mag, spec.k)) u[j] = w[j];
      u = normalized_or_throw(u);
      break;
    }

    case Constraint::NonNegative:
    case Constraint::SparseNonNegative: {
      if (w.maxCoeff() <= 0.0) {
        u = basis_at_max(w);
        break;
      }
      Vector pos = w.cwiseMax(0.0);
      const std::size_t keep = spec.constraint == Constraint::NonNegative ? spec.dimension : spec.k;
      for (Eigen::Index j : top_indices(pos, keep)) u[j] = pos[j];
      u = normalized_or_throw(u);
      break;
    }
  }
  return VectorAtom{std::move(u), spec};
}

bool validate_atom(const VectorAtom& atom, double tolerance) {
  const AtomSpec& spec = atom.spec;
  if (static_cast<std::size_t>(atom.values.size()) != spec.dimension) return false;
  if (!atom.values.allFinite()) return false;
  if (std::abs(atom.values.norm() - 1.0) > tolerance) return false;
  if (spec.is_non_negative() && atom.values.minCoeff() < -tolerance) return false;
  if (spec.is_sparse()) {
    std::size_t nnz = 0;
    for (Eigen::Index j = 0; j < atom.values.size(); ++j) {
      if (std::abs(atom.values[j]) > tolerance) ++nnz;
    }
    if (nnz > spec.k) return false;
  }
  return true;
}

}  // namespace gmp
