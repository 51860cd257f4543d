#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "gmp/oracle.hpp"
#include "gmp/power.hpp"
#include "support.hpp"

using namespace gmp;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

VectorAtom atom(Vector v, const AtomSpec& spec) { return VectorAtom{v / v.norm(), spec}; }

PowerConfig tight(int restarts = 5) {
  PowerConfig c;
  c.max_iterations = 5000;
  c.gap_tolerance = 1e-13;
  c.restarts = restarts;
  c.seed = 11;
  return c;
}

bool nondecreasing(const std::vector<double>& trace) {
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (trace[t] < trace[t - 1] - 1e-12 * (1.0 + std::abs(trace[t - 1]))) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("symmetric power on a diagonal matrix finds the dominant axis") {
  Matrix R = Matrix::Zero(2, 2);
  R.diagonal() << 2, 1;
  const auto spec = AtomSpec::unit_sphere(2);
  const auto res = atomic_power_symmetric(R, spec, atom(vec({1, 1}), spec), tight());
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(res.atom_u.values[0]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.converged);
}

TEST_CASE("identity with 1-sparse atoms resolves the tie to e1") {
  const Matrix R = Matrix::Identity(2, 2);
  const auto spec = AtomSpec::sparse(2, 1);
  const auto direct = atomic_power_symmetric(R, spec, atom(vec({1, 1}), spec), PowerConfig{});
  CHECK(direct.atom_u.values == vec({1, 0}));
  CHECK(direct.value == doctest::Approx(1.0));
  const auto via_lmo = lmo(R, spec, std::nullopt, PowerConfig{});
  CHECK(via_lmo.atom_u.values == vec({1, 0}));
  CHECK(via_lmo.value == doctest::Approx(1.0));
}

TEST_CASE("symmetric sparse lmo matches support enumeration on a seeded 5x5") {
  const Matrix R = testing::symmetric_gaussian(5, 501);
  const auto spec = AtomSpec::sparse(5, 2);
  const auto found = lmo(R, spec, std::nullopt, tight(20));
  const auto best = oracle::brute_lmo_symmetric(R, spec);
  CHECK(found.value == doctest::Approx(best.value).epsilon(1e-9));
  CHECK(validate_atom(found.atom_u));
}

TEST_CASE("non-symmetric oracles on small examples") {
  Matrix R(2, 2);
  R << 3, 0, 0, 1;
  const auto s2 = AtomSpec::unit_sphere(2);
  for (auto strategy : {NonSymmetricStrategy::Alternating, NonSymmetricStrategy::SymmetricEmbedding}) {
    const auto res = atomic_power_nonsymmetric(R, s2, s2, {atom(vec({1, 1}), s2), atom(vec({1, 2}), s2)}, tight(),
                                               strategy);
    CHECK(res.value == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(std::abs(res.atom_u.values[0]) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(res.atom_v.values[0]) == doctest::Approx(1.0).epsilon(1e-8));
  }

  const Vector a = testing::unit(vec({1, 2, 2}));
  const Vector b = testing::unit(vec({3, -1, 0, 1}));
  const Matrix rank1 = 2.0 * a * b.transpose();
  const auto res = lmo(rank1, AtomSpec::unit_sphere(3), AtomSpec::unit_sphere(4), PowerConfig{});
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(res.atom_u.values.dot(a)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(res.atom_v.values.dot(b)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-symmetric sparse lmo matches support-pair enumeration on a seeded 4x6") {
  const Matrix R = testing::gaussian(4, 6, 46);
  const auto su = AtomSpec::sparse(4, 2);
  const auto sv = AtomSpec::sparse(6, 3);
  const auto best = oracle::brute_lmo_nonsymmetric(R, su, sv);
  for (auto strategy : {NonSymmetricStrategy::Alternating, NonSymmetricStrategy::SymmetricEmbedding}) {
    PowerConfig c = tight(20);
    c.strategy = strategy;
    const auto found = lmo(R, su, sv, c);
    CHECK(std::abs(found.value - best.value) <= 1e-6);
    CHECK(validate_atom(found.atom_u));
    CHECK(validate_atom(found.atom_v));
  }
}

TEST_CASE("lmo driver") {
  SUBCASE("numerically zero residual fails") {
    const Matrix R = Matrix::Constant(3, 3, 1e-16);
    CHECK_THROWS_AS(lmo(R, AtomSpec::unit_sphere(3), std::nullopt, PowerConfig{}), LmoFailure);
  }
  SUBCASE("diagonal, three restarts") {
    Matrix R = Matrix::Zero(3, 3);
    R.diagonal() << 5, 4, 3;
    PowerConfig c;
    c.restarts = 3;
    CHECK(lmo(R, AtomSpec::unit_sphere(3), std::nullopt, c).value == doctest::Approx(5.0).epsilon(1e-8));
  }
  SUBCASE("sparse non-negative against the grid oracle") {
    const Matrix R = testing::symmetric_gaussian(5, 606);
    const auto spec = AtomSpec::sparse_non_negative(5, 2);
    const auto found = lmo(R, spec, std::nullopt, tight(20));
    const auto grid = oracle::brute_lmo_symmetric(R, spec);
    CHECK(found.value >= 0.999 * grid.value);
    CHECK(validate_atom(found.atom_u));
  }
  SUBCASE("shape checks") {
    CHECK_THROWS_AS(lmo(Matrix(Matrix::Ones(3, 2)), AtomSpec::unit_sphere(3), std::nullopt, PowerConfig{}),
                    std::invalid_argument);
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(lmo(asym, AtomSpec::unit_sphere(2), std::nullopt, PowerConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(lmo(Matrix(Matrix::Ones(3, 2)), AtomSpec::unit_sphere(3), AtomSpec::unit_sphere(3), PowerConfig{}),
                    std::invalid_argument);
  }
  SUBCASE("restarts are reproducible") {
    const Matrix R = testing::gaussian(7, 5, 9);
    const auto a = lmo(R, AtomSpec::sparse(7, 2), AtomSpec::non_negative(5), tight(8));
    const auto b = lmo(R, AtomSpec::sparse(7, 2), AtomSpec::non_negative(5), tight(8));
    CHECK(a.value == b.value);
    CHECK(a.atom_u.values == b.atom_u.values);
    CHECK(a.atom_v.values == b.atom_v.values);
  }
}

TEST_CASE("degraded oracle keeps the accuracy floor") {
  Matrix R = Matrix::Zero(2, 2);
  R.diagonal() << 2, 1;
  const auto spec = AtomSpec::unit_sphere(2);
  const auto exact = lmo(R, spec, std::nullopt, PowerConfig{});

  const auto same = degrade_lmo(exact, 1.0, R, spec, std::nullopt, 5);
  CHECK(same.value == exact.value);
  CHECK(same.atom_u.values == exact.atom_u.values);

  const auto half = degrade_lmo(exact, 0.5, R, spec, std::nullopt, 5);
  CHECK(half.value >= 1.0);
  CHECK(half.value <= 2.0);
  CHECK(validate_atom(half.atom_u));

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix A = testing::gaussian(6, 5, 1000 + seed);
    const auto su = AtomSpec::sparse(6, 3);
    const auto sv = AtomSpec::non_negative(5);
    const auto ex = lmo(A, su, sv, PowerConfig{});
    const auto deg = degrade_lmo(ex, 0.5, A, su, sv, seed);
    CHECK(deg.value >= 0.5 * ex.value);
    CHECK(deg.value <= ex.value);
    CHECK(validate_atom(deg.atom_u));
    CHECK(validate_atom(deg.atom_v));
  }
  CHECK_THROWS_AS(degrade_lmo(exact, 0.0, R, spec, std::nullopt, 1), std::invalid_argument);
}

TEST_CASE("power runs are monotone, stop on the gap and end at fixed points") {
  const std::vector<AtomSpec> specs = {AtomSpec::unit_sphere(8), AtomSpec::sparse(8, 3), AtomSpec::non_negative(8),
                                       AtomSpec::sparse_non_negative(8, 2)};
  for (const auto& spec : specs) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const Matrix R = testing::symmetric_gaussian(8, 7000 + seed);
      std::mt19937_64 rng(seed);
      PowerConfig c;
      c.gap_tolerance = 1e-14;
      c.max_iterations = 2000;
      const auto res = atomic_power_symmetric(R, spec, random_atom(spec, rng), c);
      CHECK(nondecreasing(res.value_trace));
      CHECK(res.final_gap >= 0.0);
      if (res.iterations_used < c.max_iterations) {
        CHECK(res.converged);
        CHECK(res.final_gap <= c.gap_tolerance * std::abs(res.value + auto_kappa(R)));
        PowerConfig one = c;
        one.max_iterations = 1;
        const auto next = atomic_power_symmetric(R, spec, res.atom_u, one);
        // The gap is quadratic in the displacement; tol 1e-14 puts it near 1e-7.
        CHECK((next.atom_u.values - res.atom_u.values).norm() <= 1e-6);
      }
    }
  }
}

TEST_CASE("alternating and embedded traces are nondecreasing") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix R = testing::gaussian(7, 9, 300 + seed);
    const auto su = AtomSpec::sparse_non_negative(7, 3);
    const auto sv = AtomSpec::sparse(9, 4);
    std::mt19937_64 rng(seed);
    const std::pair<VectorAtom, VectorAtom> init{random_atom(su, rng), random_atom(sv, rng)};
    for (auto strategy : {NonSymmetricStrategy::Alternating, NonSymmetricStrategy::SymmetricEmbedding}) {
      const auto res = atomic_power_nonsymmetric(R, su, sv, init, PowerConfig{}, strategy);
      CHECK(nondecreasing(res.value_trace));
      CHECK(validate_atom(res.atom_u));
      CHECK(validate_atom(res.atom_v));
    }
  }
}

TEST_CASE("unit-sphere power on PSD matrices recovers lambda_max") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Q diag(lambda) Q' with a spectral gap of at least 0.1
    const Matrix G = testing::gaussian(6, 6, 40 + seed);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
    Vector lambda(6);
    lambda << 3.0, 2.9, 2.0, 1.0, 0.5, 0.1;
    const Matrix R = Q * lambda.asDiagonal() * Q.transpose();
    const auto spec = AtomSpec::unit_sphere(6);
    PowerConfig c = tight(1);
    c.max_iterations = 20000;
    const auto res = lmo(R, spec, std::nullopt, c);
    CHECK(res.value == doctest::Approx(3.0).epsilon(1e-8));
  }
}

TEST_CASE("a constant diagonal shift does not move the maximizer") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix A = testing::gaussian(6, 6, 90 + seed);
    const Matrix R = A * A.transpose();  // PSD
    for (const auto& spec : {AtomSpec::unit_sphere(6), AtomSpec::sparse(6, 2), AtomSpec::sparse_non_negative(6, 3)}) {
      PowerConfig c = tight(20);
      c.kappa_policy = KappaPolicy::None;
      c.max_iterations = 20000;
      const auto plain = lmo(R, spec, std::nullopt, c);
      const Matrix shifted = R + 2.5 * Matrix::Identity(6, 6);
      const auto moved = lmo(shifted, spec, std::nullopt, c);
      CHECK(std::abs(plain.atom_u.values.dot(moved.atom_u.values)) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(moved.value - plain.value == doctest::Approx(2.5).epsilon(1e-9));
    }
  }
}
