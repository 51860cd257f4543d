#include "gmp/oracle.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace gmp::oracle {

namespace {

// Supports admitted by a spec: every subset of size k for sparse sets, the
// full index set otherwise. Smaller supports are dominated by their
// supersets for every objective used here.
std::vector<std::vector<Eigen::Index>> supports(const AtomSpec& spec) {
  const auto n = static_cast<unsigned>(spec.dimension);
  const unsigned size = spec.is_sparse() ? static_cast<unsigned>(spec.k) : n;
  std::vector<std::vector<Eigen::Index>> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<unsigned>(std::popcount(mask)) != size) continue;
    std::vector<Eigen::Index> s;
    for (unsigned j = 0; j < n; ++j) {
      if (mask & (1u << j)) s.push_back(static_cast<Eigen::Index>(j));
    }
    out.push_back(std::move(s));
  }
  return out;
}

Vector scatter(const Vector& local, const std::vector<Eigen::Index>& support, std::size_t dim) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < support.size(); ++i) out[support[i]] = local[static_cast<Eigen::Index>(i)];
  return out;
}

Matrix restrict(const Matrix& R, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = R(rows[i], cols[j]);
    }
  }
  return out;
}

int grid_intervals() { return static_cast<int>(std::ceil((std::numbers::pi / 2.0) / kGridStep)); }

// Visit every point of the hyperspherical grid on the non-negative orthant
// of the unit sphere in R^s (angles in [0, pi/2], inclusive endpoints).
void for_each_orthant_point(int s, const std::function<void(const Vector&)>& visit) {
  const int N = grid_intervals();
  const double step = (std::numbers::pi / 2.0) / N;
  Vector x(s);
  std::function<void(int, double)> rec = [&](int level, double sin_prod) {
    if (level == s - 1) {
      x[level] = sin_prod;
      visit(x);
      return;
    }
    for (int t = 0; t <= N; ++t) {
      const double phi = t * step;
      x[level] = sin_prod * std::cos(phi);
      rec(level + 1, sin_prod * std::sin(phi));
    }
  };
  rec(0, 1.0);
}

// max_{v in A} <v, w> by enumerating supports; written independently of
// the production closed forms.
std::pair<double, Vector> inner_max(const AtomSpec& spec, const Vector& w) {
  double best = -INFINITY;
  Vector best_v;
  for (const auto& s : supports(spec)) {
    Vector ws(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) ws[static_cast<Eigen::Index>(i)] = w[s[i]];
    Vector local;
    double value;
    if (spec.is_non_negative()) {
      Vector pos = ws.cwiseMax(0.0);
      if (pos.norm() > 0.0) {
        local = pos / pos.norm();
        value = pos.norm();
      } else {
        Eigen::Index j = 0;
        value = ws.maxCoeff(&j);
        local = Vector::Zero(ws.size());
        local[j] = 1.0;
      }
    } else {
      value = ws.norm();
      local = value > 0.0 ? Vector(ws / value) : Vector(Vector::Unit(ws.size(), 0));
    }
    if (value > best) {
      best = value;
      best_v = scatter(local, s, spec.dimension);
    }
  }
  return {best, best_v};
}

}  // namespace

OracleResult brute_lmo_symmetric(const Matrix& R, const AtomSpec& spec) {
  if (R.rows() != R.cols() || R.rows() != static_cast<Eigen::Index>(spec.dimension)) {
    throw std::invalid_argument("oracle: matrix does not match atom dimension");
  }
  OracleResult out;
  out.value = -INFINITY;

  if (!spec.is_non_negative()) {
    if (spec.dimension > 12) throw std::invalid_argument("oracle: sparse enumeration limited to dimension 12");
    out.method = Method::SupportEnumeration;
    for (const auto& s : supports(spec)) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(restrict(R, s, s));
      const Eigen::Index top = eig.eigenvalues().size() - 1;
      if (eig.eigenvalues()[top] > out.value) {
        out.value = eig.eigenvalues()[top];
        out.atom_u = VectorAtom{scatter(eig.eigenvectors().col(top), s, spec.dimension), spec};
      }
    }
    out.atom_v = out.atom_u;
    return out;
  }

  if (spec.dimension > 5) throw std::invalid_argument("oracle: non-negative grid limited to dimension 5");
  out.method = Method::GridSearch;
  out.resolution = (std::numbers::pi / 2.0) / grid_intervals();
  for (const auto& s : supports(spec)) {
    const Matrix Rs = restrict(R, s, s);
    for_each_orthant_point(static_cast<int>(s.size()), [&](const Vector& x) {
      const double value = x.dot(Rs * x);
      if (value > out.value) {
        out.value = value;
        out.atom_u = VectorAtom{scatter(x, s, spec.dimension), spec};
      }
    });
  }
  out.atom_v = out.atom_u;
  return out;
}

OracleResult brute_lmo_nonsymmetric(const Matrix& R, const AtomSpec& spec_u, const AtomSpec& spec_v) {
  if (R.rows() != static_cast<Eigen::Index>(spec_u.dimension) ||
      R.cols() != static_cast<Eigen::Index>(spec_v.dimension)) {
    throw std::invalid_argument("oracle: matrix does not match atom dimensions");
  }
  OracleResult out;
  out.value = -INFINITY;

  if (!spec_u.is_non_negative() && !spec_v.is_non_negative()) {
    if (spec_u.dimension > 12 || spec_v.dimension > 12) {
      throw std::invalid_argument("oracle: support enumeration limited to dimension 12");
    }
    out.method = Method::SupportEnumeration;
    for (const auto& su : supports(spec_u)) {
      for (const auto& sv : supports(spec_v)) {
        Eigen::JacobiSVD<Matrix> svd(restrict(R, su, sv), Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.singularValues()[0] > out.value) {
          out.value = svd.singularValues()[0];
          out.atom_u = VectorAtom{scatter(svd.matrixU().col(0), su, spec_u.dimension), spec_u};
          out.atom_v = VectorAtom{scatter(svd.matrixV().col(0), sv, spec_v.dimension), spec_v};
        }
      }
    }
    return out;
  }

  // Grid over a non-negative factor; the other factor is maximized exactly.
  const bool grid_on_u = spec_u.is_non_negative();
  const AtomSpec& grid_spec = grid_on_u ? spec_u : spec_v;
  const AtomSpec& free_spec = grid_on_u ? spec_v : spec_u;
  const Matrix M = grid_on_u ? Matrix(R.transpose()) : R;  // free = M * grid
  if (grid_spec.dimension > 4) throw std::invalid_argument("oracle: non-negative grid limited to dimension 4");
  out.method = Method::GridSearch;
  out.resolution = (std::numbers::pi / 2.0) / grid_intervals();
  for (const auto& s : supports(grid_spec)) {
    const Matrix Ms = restrict(M, [&] {
      std::vector<Eigen::Index> all(free_spec.dimension);
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
      return all;
    }(), s);
    for_each_orthant_point(static_cast<int>(s.size()), [&](const Vector& x) {
      auto [value, free_atom] = inner_max(free_spec, Ms * x);
      if (value > out.value) {
        out.value = value;
        VectorAtom g{scatter(x, s, grid_spec.dimension), grid_spec};
        VectorAtom f{free_atom, free_spec};
        out.atom_u = grid_on_u ? g : f;
        out.atom_v = grid_on_u ? f : g;
      }
    });
  }
  return out;
}

std::vector<double> svd_reference(const Matrix& Y, int rank) {
  if (rank < 1 || rank > std::min(Y.rows(), Y.cols())) {
    throw std::invalid_argument("svd_reference: rank out of range");
  }
  Eigen::JacobiSVD<Matrix> svd(Y);
  const Vector& sigma = svd.singularValues();
  std::vector<double> costs;
  for (int r = 1; r <= rank; ++r) {
    double tail = 0.0;
    for (Eigen::Index i = r; i < sigma.size(); ++i) tail += sigma[i] * sigma[i];
    costs.push_back(0.5 * tail);
  }
  return costs;
}

double exhaustive_coherence(const Matrix& unit_atoms, int m) {
  const auto n = static_cast<unsigned>(unit_atoms.cols());
  if (n > 20) throw std::invalid_argument("exhaustive_coherence: at most 20 atoms");
  if (m < 1 || static_cast<unsigned>(m) > n - 1) throw std::invalid_argument("exhaustive_coherence: m out of range");
  const Matrix gram = (unit_atoms.transpose() * unit_atoms).cwiseAbs();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != m) continue;
    for (unsigned k = 0; k < n; ++k) {
      if (mask & (1u << k)) continue;
      double s = 0.0;
      for (unsigned i = 0; i < n; ++i) {
        if (mask & (1u << i)) s += gram(k, i);
      }
      best = std::max(best, s);
    }
  }
  return best;
}

}  // namespace gmp::oracle
