#include <cmath>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <doctest.h>

#include "gmp/oracle.hpp"
#include "gmp/pursuit.hpp"
#include "support.hpp"

using namespace gmp;

namespace {

PursuitConfig svd_config(int rank) {
  PursuitConfig c;
  c.max_rank = rank;
  c.power.restarts = 5;
  c.power.max_iterations = 500;
  c.power.gap_tolerance = 1e-12;
  c.seed = 3;
  return c;
}

RankOneTerm term(const Vector& u, const Vector& v) {
  return {VectorAtom{u / u.norm(), AtomSpec::unit_sphere(static_cast<std::size_t>(u.size()))},
          VectorAtom{v / v.norm(), AtomSpec::unit_sphere(static_cast<std::size_t>(v.size()))}};
}

Matrix masked_outer(const TargetProblem& p, const RankOneTerm& t) {
  const Matrix Z = t.u.values * t.v.values.transpose();
  if (!p.masked()) return Z;
  Matrix out = Matrix::Zero(Z.rows(), Z.cols());
  for (const auto& c : *p.mask()) out(c.row, c.col) = Z(c.row, c.col);
  return out;
}

}  // namespace

TEST_CASE("exact rank-one target is recovered in one step") {
  const Vector a = testing::unit(testing::gaussian(6, 1, 1).col(0));
  const Vector b = testing::unit(testing::gaussian(4, 1, 2).col(0));
  const TargetProblem p(Matrix(2.0 * a * b.transpose()));
  const auto [model, trace] = gmp_fit(p, AtomSpec::unit_sphere(6), AtomSpec::unit_sphere(4), svd_config(1));
  REQUIRE(model.rank() == 1);
  CHECK(cost(p, model) <= 1e-12);
  CHECK(model.weights[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(trace.records.back().cost == cost(p, model));
}

TEST_CASE("unit-sphere pursuit follows the truncated SVD") {
  const Matrix Y = testing::gaussian(20, 15, 2015);
  const TargetProblem p(Y);
  const auto reference = oracle::svd_reference(Y, 5);
  const auto [model, trace] = gmp_fit(p, AtomSpec::unit_sphere(20), AtomSpec::unit_sphere(15), svd_config(5));
  REQUIRE(trace.records.size() == 5);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(std::abs(trace.records[r].cost - reference[r]) <= 1e-4 * reference[r]);
  }
}

TEST_CASE("refit examples") {
  SUBCASE("single term") {
    const RankOneTerm t = term(Vector::Unit(3, 1), Vector::Unit(2, 0));
    const TargetProblem p(Matrix(3.0 * t.u.values * t.v.values.transpose()));
    const auto fit = refit_weights(p, {t});
    CHECK(fit.weights[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_FALSE(fit.rank_deficient);
  }
  SUBCASE("orthogonal terms") {
    const Matrix Y = testing::gaussian(3, 3, 4);
    const TargetProblem p(Y);
    const std::vector<RankOneTerm> ts = {term(Vector::Unit(3, 0), Vector::Unit(3, 1)),
                                         term(Vector::Unit(3, 2), Vector::Unit(3, 2))};
    const auto fit = refit_weights(p, ts);
    CHECK(fit.weights[0] == doctest::Approx(Y(0, 1)).epsilon(1e-14));
    CHECK(fit.weights[1] == doctest::Approx(Y(2, 2)).epsilon(1e-14));
  }
  SUBCASE("correlated terms against a direct least-squares solve") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix Y = testing::gaussian(4, 4, rng);
      const TargetProblem p = trial % 2 ? TargetProblem(Y) : TargetProblem(Y, testing::random_mask(4, 4, 0.7, rng));
      const Vector u1 = testing::gaussian(4, 1, rng).col(0);
      const Vector v1 = testing::gaussian(4, 1, rng).col(0);
      const Vector u2 = u1 + 0.3 * testing::gaussian(4, 1, rng).col(0);
      const std::vector<RankOneTerm> ts = {term(u1, v1), term(u2, v1)};
      Matrix D(16, 2);
      Vector y(16);
      for (int k = 0; k < 2; ++k) D.col(k) = masked_outer(p, ts[k]).reshaped();
      y = p.dense_target().reshaped();
      const Vector direct = D.colPivHouseholderQr().solve(y);
      const auto fit = refit_weights(p, ts);
      CHECK((fit.weights - direct).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + direct.norm()));
    }
  }
  SUBCASE("repeated atoms take the minimum-norm solution") {
    const RankOneTerm t = term(Vector::Unit(2, 0), Vector::Unit(2, 0));
    const TargetProblem p(Matrix::Identity(2, 2));
    const auto fit = refit_weights(p, {t, t});
    CHECK(fit.rank_deficient);
    CHECK(fit.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("corrections") {
  const Matrix Y = testing::gaussian(8, 6, 81);
  const TargetProblem p(Y);
  const auto su = AtomSpec::unit_sphere(8);
  const auto sv = AtomSpec::unit_sphere(6);
  const auto [model, trace] = gmp_fit(p, su, sv, svd_config(3));

  SUBCASE("zero passes is the identity") {
    const auto out = correct_atoms(p, model, su, sv, svd_config(3).power, 0);
    CHECK(out.accepted == 0);
    CHECK(out.model.weights == model.weights);
  }
  SUBCASE("exact singular factors admit no improving replacement") {
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    FactorModel exact = empty_model(8, 6);
    exact.weights = svd.singularValues().head(3);
    for (int t = 0; t < 3; ++t) exact.terms.push_back({{svd.matrixU().col(t), su}, {svd.matrixV().col(t), sv}});
    const auto out = correct_atoms(p, exact, su, sv, svd_config(3).power, 2);
    CHECK(out.accepted == 0);
    CHECK(cost(p, out.model) == cost(p, exact));
  }
  SUBCASE("cost never increases") {
    const auto sk = AtomSpec::sparse(8, 2);
    const auto sn = AtomSpec::non_negative(6);
    const auto [m, t] = gmp_fit(p, sk, sn, svd_config(3));
    const auto out = correct_atoms(p, m, sk, sn, svd_config(3).power, 3);
    CHECK(cost(p, out.model) <= cost(p, m) + 1e-12);
    for (const auto& tm : out.model.terms) {
      CHECK(validate_atom(tm.u));
      CHECK(validate_atom(tm.v));
    }
  }
}

TEST_CASE("corrections beat greedy deflation on a planted sparse instance") {
  // Two overlapping sparse components: greedy picks a blend first.
  const std::size_t n = 10;
  int strictly = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    Vector a = Vector::Zero(n), b = Vector::Zero(n);
    a.head(4) = testing::gaussian(4, 1, rng).col(0).cwiseAbs();
    b.segment(2, 4) = testing::gaussian(4, 1, rng).col(0).cwiseAbs();
    a.normalize();
    b.normalize();
    const Matrix Y = 3.0 * a * a.transpose() + 2.5 * b * b.transpose();
    const TargetProblem p(Y, true);
    PursuitConfig c = svd_config(2);
    c.power.restarts = 10;
    const auto spec = AtomSpec::sparse(n, 4);
    const auto plain = gmp_fit(p, spec, spec, c);
    c.correction_passes = 2;
    const auto corrected = gmp_fit(p, spec, spec, c);
    const double cp = cost(p, plain.first);
    const double cc = cost(p, corrected.first);
    CHECK(cc <= cp + 1e-12);
    if (cc < cp - 1e-9) ++strictly;
  }
  CHECK(strictly >= 1);
}

TEST_CASE("pursuit invariants over atom sets and masks") {
  const std::vector<std::pair<AtomSpec, AtomSpec>> sets = {
      {AtomSpec::unit_sphere(7), AtomSpec::unit_sphere(6)},
      {AtomSpec::sparse(7, 3), AtomSpec::unit_sphere(6)},
      {AtomSpec::non_negative(7), AtomSpec::sparse_non_negative(6, 2)},
      {AtomSpec::sparse(7, 2), AtomSpec::sparse(6, 2)}};
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix Y = testing::gaussian(7, 6, rng);
    const bool masked = seed % 2 == 1;
    const TargetProblem p = masked ? TargetProblem(Y, testing::random_mask(7, 6, 0.5, rng)) : TargetProblem(Y);
    const auto& [su, sv] = sets[seed % sets.size()];
    PursuitConfig c = svd_config(6);
    c.seed = seed;
    c.power.max_iterations = 200;
    double previous = 0.5 * p.target_norm() * p.target_norm();
    const double scale = 1.0 + p.target_norm();
    const auto observer = [&](const FactorModel& m, const TraceRecord& rec) {
      const Matrix R = residual(p, m);
      for (const auto& t : m.terms) {
        CHECK(std::abs(inner_omega(R, masked_outer(p, t), p.mask())) <= 1e-9 * scale);
      }
      CHECK(rec.cost <= previous + 1e-12);
      const Matrix Z = masked_outer(p, m.terms.back());
      const double z2 = inner_omega(Z, Z, p.mask());
      if (z2 > 0) CHECK(previous - rec.cost >= 0.5 * rec.lmo_value * rec.lmo_value / z2 - 1e-9);
      previous = rec.cost;
    };
    const auto [model, trace] = gmp_fit(p, su, sv, c, observer);
    CHECK(trace.records.back().cost == cost(p, model));
  }
}

TEST_CASE("full refit never trails the newest-weight-only variant") {
  // On unit-sphere atoms full refit tracks the truncated SVD, so it is
  // optimal at every rank and cannot trail any other rank-r trajectory.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TargetProblem p(testing::gaussian(9, 8, 300 + seed));
    PursuitConfig c = svd_config(6);
    c.seed = seed;
    const auto full = gmp_fit(p, AtomSpec::unit_sphere(9), AtomSpec::unit_sphere(8), c);
    c.weight_mode = WeightMode::NewWeightOnly;
    const auto mp = gmp_fit(p, AtomSpec::unit_sphere(9), AtomSpec::unit_sphere(8), c);
    const std::size_t n = std::min(full.second.records.size(), mp.second.records.size());
    for (std::size_t r = 0; r < n; ++r) {
      CHECK(full.second.records[r].cost <= mp.second.records[r].cost + 1e-12);
    }
  }
  // On any atom set, refitting the newest-weight-only atoms never loses.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const TargetProblem p(testing::gaussian(9, 8, 400 + seed), testing::random_mask(9, 8, 0.6, rng));
    PursuitConfig c = svd_config(5);
    c.seed = seed;
    c.weight_mode = WeightMode::NewWeightOnly;
    const auto [mp, trace] = gmp_fit(p, AtomSpec::sparse(9, 3), AtomSpec::non_negative(8), c);
    FactorModel refit = mp;
    refit.weights = refit_weights(p, mp.terms).weights;
    CHECK(cost(p, refit) <= cost(p, mp) + 1e-12);
  }
}

TEST_CASE("stopping rules") {
  SUBCASE("zero target stops before the first atom") {
    const TargetProblem p(Matrix::Zero(4, 3));
    const auto [model, trace] = gmp_fit(p, AtomSpec::unit_sphere(4), AtomSpec::unit_sphere(3), svd_config(3));
    CHECK(model.rank() == 0);
    CHECK(trace.lmo_failure_at_start);
    CHECK(trace.records.empty());
  }
  SUBCASE("exactly representable target stops on LMO optimality") {
    Matrix Y = Matrix::Zero(4, 4);
    Y.diagonal() << 3, 2, 0, 0;
    const TargetProblem p(Y);
    const auto [model, trace] = gmp_fit(p, AtomSpec::unit_sphere(4), AtomSpec::unit_sphere(4), svd_config(4));
    CHECK(model.rank() == 2);
    CHECK(trace.stop_reason == StopReason::LmoOptimal);
  }
  SUBCASE("tolerance") {
    Matrix Y = Matrix::Zero(4, 4);
    Y.diagonal() << 10, 1, 0.1, 0.01;
    const TargetProblem p(Y);
    PursuitConfig c = svd_config(4);
    c.stop_tolerance = 0.05;
    const auto [model, trace] = gmp_fit(p, AtomSpec::unit_sphere(4), AtomSpec::unit_sphere(4), c);
    CHECK(trace.stop_reason == StopReason::Tolerance);
    CHECK(model.rank() == 1);
  }
  SUBCASE("max rank") {
    const TargetProblem p(testing::gaussian(5, 5, 1));
    const auto [model, trace] = gmp_fit(p, AtomSpec::unit_sphere(5), AtomSpec::unit_sphere(5), svd_config(2));
    CHECK(model.rank() == 2);
    CHECK(trace.stop_reason == StopReason::MaxRank);
  }
  SUBCASE("invalid configuration") {
    PursuitConfig c;
    c.max_rank = 0;
    const TargetProblem p(Matrix::Ones(2, 2));
    CHECK_THROWS_AS(gmp_fit(p, AtomSpec::unit_sphere(2), AtomSpec::unit_sphere(2), c), std::invalid_argument);
  }
}

TEST_CASE("symmetric mode uses v = u") {
  const Matrix A = testing::gaussian(6, 3, 12);
  const TargetProblem p(Matrix(A * A.transpose()), true);
  const auto spec = AtomSpec::non_negative(6);
  const auto [model, trace] = gmp_fit(p, spec, AtomSpec::unit_sphere(1), svd_config(3));
  REQUIRE(model.rank() >= 1);
  for (const auto& t : model.terms) CHECK(t.u.values == t.v.values);
}

TEST_CASE("fits are reproducible") {
  const TargetProblem p(testing::gaussian(8, 7, 5));
  PursuitConfig c = svd_config(4);
  c.correction_passes = 1;
  const auto a = gmp_fit(p, AtomSpec::sparse(8, 3), AtomSpec::non_negative(7), c);
  const auto b = gmp_fit(p, AtomSpec::sparse(8, 3), AtomSpec::non_negative(7), c);
  CHECK(a.first.weights == b.first.weights);
  for (std::size_t t = 0; t < a.first.rank(); ++t) CHECK(a.first.terms[t].u.values == b.first.terms[t].u.values);
}
