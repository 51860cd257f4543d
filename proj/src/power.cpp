#include "gmp/power.hpp"

#include <cmath>
#include <string>

namespace gmp {

void PowerConfig::check() const {
  if (max_iterations < 1) throw std::invalid_argument("power: max_iterations must be >= 1");
  if (restarts < 1) throw std::invalid_argument("power: restarts must be >= 1");
  if (!(gap_tolerance >= 0.0)) throw std::invalid_argument("power: gap_tolerance must be >= 0");
}

double auto_kappa(const MatrixOperator& R) {
  const double fro = R.frobenius_norm();
  return fro + 1e-6 * (1.0 + fro);
}

VectorAtom random_atom(const AtomSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(static_cast<Eigen::Index>(spec.dimension));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = normal(rng);
  return linear_argmax(spec, w);
}

namespace {

std::mt19937_64 restart_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void check_atom_dim(const VectorAtom& atom, const AtomSpec& spec, const char* what) {
  if (atom.values.size() != static_cast<Eigen::Index>(spec.dimension)) {
    throw std::invalid_argument(std::string("power: ") + what + " init has wrong dimension");
  }
}

PowerResult run_symmetric(const MatrixOperator& R, const AtomSpec& spec, const Vector& init,
                          const PowerConfig& config, double kappa) {
  PowerResult out;
  Vector u = init;
  Vector Ru = R.apply(u);
  double g = u.dot(Ru);
  out.value_trace.push_back(g);

  for (int t = 0; t < config.max_iterations; ++t) {
    const Vector w = Ru + kappa * u;
    VectorAtom next = linear_argmax(spec, w);
    const double gap = std::max(0.0, w.dot(next.values) - w.dot(u));
    const double shifted = g + kappa;

    u = std::move(next.values);
    Ru = R.apply(u);
    g = u.dot(Ru);
    out.value_trace.push_back(g);
    out.iterations_used = t + 1;
    out.final_gap = gap;

    if (gap <= config.gap_tolerance * std::abs(shifted)) {
      out.converged = true;
      break;
    }
  }
  out.atom_u = VectorAtom{u, spec};
  out.atom_v = out.atom_u;
  out.value = g;
  return out;
}

PowerResult run_alternating(const MatrixOperator& R, const AtomSpec& spec_u, const AtomSpec& spec_v,
                            const Vector& init_u, const Vector& init_v, const PowerConfig& config) {
  PowerResult out;
  Vector u = init_u;
  Vector v = init_v;
  double value = R.bilinear(u, v);
  out.value_trace.push_back(value);

  for (int t = 0; t < config.max_iterations; ++t) {
    const Vector Rv = R.apply(v);
    VectorAtom un = linear_argmax(spec_u, Rv);
    const double gap_u = std::max(0.0, Rv.dot(un.values) - Rv.dot(u));
    u = std::move(un.values);

    const Vector Rtu = R.apply_transpose(u);
    VectorAtom vn = linear_argmax(spec_v, Rtu);
    const double gap_v = std::max(0.0, Rtu.dot(vn.values) - Rtu.dot(v));
    v = std::move(vn.values);

    value = Rtu.dot(v);
    out.value_trace.push_back(value);
    out.iterations_used = t + 1;
    out.final_gap = gap_u + gap_v;

    if (out.final_gap <= config.gap_tolerance * std::abs(value)) {
      out.converged = true;
      break;
    }
  }
  out.atom_u = VectorAtom{u, spec_u};
  out.atom_v = VectorAtom{v, spec_v};
  out.value = value;
  return out;
}

// Symmetric power method on T = [0 R; R' 0] over the product set A_u x A_v.
// The linear maximization over a product set separates into one exact
// argmax per block, so both blocks stay unit-norm members of their sets.
PowerResult run_embedded(const MatrixOperator& R, const AtomSpec& spec_u, const AtomSpec& spec_v,
                         const Vector& init_u, const Vector& init_v, const PowerConfig& config) {
  const double fro_t = std::sqrt(2.0) * R.frobenius_norm();
  const double kappa =
      config.kappa_policy == KappaPolicy::Auto ? fro_t + 1e-6 * (1.0 + fro_t) : 0.0;

  PowerResult out;
  Vector u = init_u;
  Vector v = init_v;
  Vector Rv = R.apply(v);
  Vector Rtu = R.apply_transpose(u);
  double value = u.dot(Rv);
  out.value_trace.push_back(value);

  for (int t = 0; t < config.max_iterations; ++t) {
    const Vector wu = Rv + kappa * u;
    const Vector wv = Rtu + kappa * v;
    VectorAtom un = linear_argmax(spec_u, wu);
    VectorAtom vn = linear_argmax(spec_v, wv);
    const double gap = std::max(0.0, wu.dot(un.values) - wu.dot(u)) +
                       std::max(0.0, wv.dot(vn.values) - wv.dot(v));
    // t'(T + kappa I)t for unit blocks
    const double shifted = 2.0 * value + 2.0 * kappa;

    u = std::move(un.values);
    v = std::move(vn.values);
    Rv = R.apply(v);
    Rtu = R.apply_transpose(u);
    value = u.dot(Rv);
    out.value_trace.push_back(value);
    out.iterations_used = t + 1;
    out.final_gap = gap;

    if (gap <= config.gap_tolerance * std::abs(shifted)) {
      out.converged = true;
      break;
    }
  }
  out.atom_u = VectorAtom{u, spec_u};
  out.atom_v = VectorAtom{v, spec_v};
  out.value = value;
  return out;
}

void check_symmetric(const MatrixOperator& R, const AtomSpec& spec) {
  if (R.rows() != R.cols()) throw std::invalid_argument("power: symmetric mode needs a square matrix");
  if (R.rows() != static_cast<Eigen::Index>(spec.dimension)) {
    throw std::invalid_argument("power: matrix size does not match atom dimension");
  }
  if (R.relative_asymmetry() > 1e-10) throw std::invalid_argument("power: matrix is not symmetric");
}

void check_rectangular(const MatrixOperator& R, const AtomSpec& spec_u, const AtomSpec& spec_v) {
  if (R.rows() != static_cast<Eigen::Index>(spec_u.dimension) ||
      R.cols() != static_cast<Eigen::Index>(spec_v.dimension)) {
    throw std::invalid_argument("power: matrix shape does not match atom dimensions");
  }
}

}  // namespace

PowerResult atomic_power_symmetric(const MatrixOperator& R, const AtomSpec& spec,
                                   const VectorAtom& init, const PowerConfig& config) {
  config.check();
  check_symmetric(R, spec);
  check_atom_dim(init, spec, "u");
  const double kappa = config.kappa_policy == KappaPolicy::Auto ? auto_kappa(R) : 0.0;
  return run_symmetric(R, spec, init.values, config, kappa);
}

PowerResult atomic_power_nonsymmetric(const MatrixOperator& R, const AtomSpec& spec_u,
                                      const AtomSpec& spec_v,
                                      const std::pair<VectorAtom, VectorAtom>& init,
                                      const PowerConfig& config,
                                      NonSymmetricStrategy strategy) {
  config.check();
  check_rectangular(R, spec_u, spec_v);
  check_atom_dim(init.first, spec_u, "u");
  check_atom_dim(init.second, spec_v, "v");
  if (strategy == NonSymmetricStrategy::Alternating) {
    return run_alternating(R, spec_u, spec_v, init.first.values, init.second.values, config);
  }
  return run_embedded(R, spec_u, spec_v, init.first.values, init.second.values, config);
}

PowerResult lmo(const MatrixOperator& R, const AtomSpec& spec_u,
                const std::optional<AtomSpec>& spec_v, const PowerConfig& config,
                const std::vector<std::pair<VectorAtom, VectorAtom>>& extra_inits) {
  config.check();
  const bool symmetric = !spec_v.has_value();
  if (symmetric) {
    check_symmetric(R, spec_u);
  } else {
    check_rectangular(R, spec_u, *spec_v);
  }
  if (!(R.frobenius_norm() >= 1e-14)) throw LmoFailure("lmo: residual is numerically zero");

  const double kappa = symmetric && config.kappa_policy == KappaPolicy::Auto ? auto_kappa(R) : 0.0;

  auto run = [&](const Vector& u0, const Vector& v0) {
    if (symmetric) return run_symmetric(R, spec_u, u0, config, kappa);
    if (config.strategy == NonSymmetricStrategy::Alternating) {
      return run_alternating(R, spec_u, *spec_v, u0, v0, config);
    }
    return run_embedded(R, spec_u, *spec_v, u0, v0, config);
  };

  std::optional<PowerResult> best;
  auto consider = [&](PowerResult r) {
    if (!best || r.value > best->value) best = std::move(r);
  };

  for (int restart = 0; restart < config.restarts; ++restart) {
    try {
      Vector u0, v0;
      if (restart == 0) {
        Eigen::Index top = 0;
        R.row_squared_norms().maxCoeff(&top);
        const Vector row = R.row(top);
        if (symmetric) {
          u0 = linear_argmax(spec_u, row).values;
        } else {
          v0 = linear_argmax(*spec_v, row).values;
          u0 = linear_argmax(spec_u, R.apply(v0)).values;
        }
      } else {
        auto rng = restart_rng(config.seed, static_cast<std::uint64_t>(restart));
        u0 = random_atom(spec_u, rng).values;
        if (!symmetric) v0 = random_atom(*spec_v, rng).values;
      }
      consider(run(u0, v0));
    } catch (const DegenerateDirection&) {
      // counts as a spent restart
    }
  }

  for (const auto& [iu, iv] : extra_inits) {
    try {
      consider(run(iu.values, symmetric ? Vector() : iv.values));
    } catch (const DegenerateDirection&) {
    }
  }

  if (!best) throw LmoFailure("lmo: every restart hit a degenerate direction");
  return *best;
}

PowerResult degrade_lmo(const PowerResult& exact, double delta, const MatrixOperator& R,
                        const AtomSpec& spec_u, const std::optional<AtomSpec>& spec_v,
                        std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("degrade_lmo: delta must be in (0, 1]");
  if (delta == 1.0) return exact;
  if (!(exact.value > 0.0)) throw std::invalid_argument("degrade_lmo: exact value must be positive");

  const bool symmetric = !spec_v.has_value();
  auto rng = restart_rng(seed, 0x9e3779b97f4a7c15ULL);
  const Vector ru = random_atom(spec_u, rng).values;
  const Vector rv = symmetric ? ru : random_atom(*spec_v, rng).values;
  const double floor = delta * exact.value;

  // Blend weight 0 reproduces the exact atoms; 1 is a purely random atom.
  // Bisect toward the largest blend that still meets the accuracy floor.
  struct Candidate {
    Vector u, v;
    double value;
  };
  auto blend = [&](double lambda) -> std::optional<Candidate> {
    try {
      Vector u = linear_argmax(spec_u, (1.0 - lambda) * exact.atom_u.values + lambda * ru).values;
      Vector v = symmetric ? u
                           : linear_argmax(*spec_v, (1.0 - lambda) * exact.atom_v.values + lambda * rv).values;
      const double value = R.bilinear(u, v);
      return Candidate{std::move(u), std::move(v), value};
    } catch (const DegenerateDirection&) {
      return std::nullopt;
    }
  };

  Candidate accepted{exact.atom_u.values, exact.atom_v.values, exact.value};
  double lo = 0.0, hi = 1.0;
  if (auto c = blend(hi); c && c->value >= floor && c->value <= exact.value) {
    accepted = std::move(*c);
  } else {
    for (int step = 0; step < 40; ++step) {
      const double mid = 0.5 * (lo + hi);
      auto cand = blend(mid);
      if (!cand || cand->value < floor) {
        hi = mid;
        continue;
      }
      lo = mid;
      if (cand->value <= exact.value) accepted = std::move(*cand);
    }
  }

  PowerResult out = exact;
  out.atom_u = VectorAtom{accepted.u, spec_u};
  out.atom_v = VectorAtom{accepted.v, symmetric ? spec_u : *spec_v};
  out.value = accepted.value;
  out.value_trace = {accepted.value};
  if (!(out.value >= floor && out.value <= exact.value)) {
    throw std::logic_error("degrade_lmo: accuracy bound violated");
  }
  return out;
}

}  // namespace gmp
