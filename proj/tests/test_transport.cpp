#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "eqot/sampling.hpp"
#include "eqot/transport.hpp"
#include "expect_error.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace eqot;
using namespace eqot::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FiniteMetricMeasureSpace two_points() {
  Matrix d(2, 2);
  d << 0, 1, 1, 0;
  return FiniteMetricMeasureSpace({"a", "b"}, d, Vector::Ones(2));
}

// Random composition of `total` into `parts` nonnegative integers.
std::vector<int> composition(Rng& rng, int total, Index parts) {
  std::vector<int> out(parts, 0);
  std::uniform_int_distribution<Index> pick(0, parts - 1);
  for (int k = 0; k < total; ++k) ++out[pick(rng)];
  return out;
}

Vector as_weights(const std::vector<int>& counts, int scale) {
  Vector w(counts.size());
  for (Index i = 0; i < counts.size(); ++i) w(i) = static_cast<double>(counts[i]) / scale;
  return w;
}

}  // namespace

TEST_CASE("measure validation") {
  Vector bad(2);
  bad << 0.5, 0.6;
  CHECK(error_code([&] { Measure m(bad); }) == ErrorCode::Validation);
  bad << -0.5, 1.5;
  CHECK(error_code([&] { Measure m(bad); }) == ErrorCode::Validation);
  Vector w(3);
  w << 1, 2, 1;
  CHECK(Measure::normalized(w)(1) == 0.5);
  CHECK(Measure::dirac(3, 2)(2) == 1.0);
}

TEST_CASE("wasserstein between two Diracs") {
  const auto s = two_points();
  for (double p : {1.0, 2.0, 3.5}) {
    const auto w = wasserstein(s, Measure::dirac(2, 0), Measure::dirac(2, 1), p);
    CHECK(w.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w.coupling.plan(0, 1) == 1.0);
    CHECK(w.coupling.plan(1, 0) == 0.0);
  }
}

TEST_CASE("wasserstein of a measure with itself is zero") {
  Rng rng(3);
  const auto c5 = cycle_space(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Measure mu = random_measure(rng, 5, 0.3);
    const auto w = wasserstein(c5, mu, mu, 2.0);
    CHECK(w.cost == 0.0);
    CHECK(w.coupling.cost(cost_table(c5, 2.0)) == 0.0);
  }
}

TEST_CASE("three-point line example") {
  const auto line = line_space({0.0, 1.0, 2.0});
  Vector a(3), b(3);
  a << 1, 0, 0;
  b << 0, 0.5, 0.5;
  const auto w = wasserstein(line, Measure(a), Measure(b), 2.0);
  CHECK(w.cost == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(w.duality_gap <= 1e-9);
}

TEST_CASE("wasserstein error paths") {
  const auto s = two_points();
  CHECK(error_code([&] { wasserstein(s, Measure::dirac(3, 0), Measure::dirac(2, 1)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(error_code([&] { wasserstein(s, Measure::dirac(2, 0), Measure::dirac(2, 1), 0.5); }) ==
        ErrorCode::Validation);
}

TEST_CASE("strong duality and feasibility on random instances") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const QuotientSpace q = random_quotient(rng, 2, 10, 1);
    const auto& s = q.base();
    const double p = 1.0 + trial % 3;
    const Measure mu0 = random_measure(rng, s.size(), 0.4);
    const Measure mu1 = random_measure(rng, s.size(), 0.4);
    const auto w = wasserstein(s, mu0, mu1, p);
    const Matrix cost = cost_table(s, p);
    CHECK(w.duality_gap <= 1e-9);
    CHECK(std::abs(w.potentials.objective(mu0, mu1) - w.cost) <=
          1e-9 * std::max(1.0, w.cost));
    CHECK(w.potentials.max_violation(cost) <= 1e-9);
    CHECK(w.coupling.marginal_residual(mu0, mu1) <= 1e-10);
    CHECK((w.coupling.plan.array() >= 0.0).all());
    CHECK(check_cyclical_monotonicity(s, w.coupling.support(), p, 4).holds);
  }
}

TEST_CASE("W_p is a metric on random triples") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const QuotientSpace q = random_quotient(rng, 2, 8, 1);
    const auto& s = q.base();
    const double p = 1.0 + trial % 3;
    const Measure a = random_measure(rng, s.size(), 0.3);
    const Measure b = random_measure(rng, s.size(), 0.3);
    const Measure c = random_measure(rng, s.size(), 0.3);
    const double ab = wasserstein(s, a, b, p).value;
    const double ba = wasserstein(s, b, a, p).value;
    const double bc = wasserstein(s, b, c, p).value;
    const double ac = wasserstein(s, a, c, p).value;
    CHECK(std::abs(ab - ba) <= 1e-8);
    CHECK(ac <= ab + bc + 1e-8);
    CHECK(wasserstein(s, a, a, p).value == 0.0);
  }
}

TEST_CASE("LP optimum matches the polytope vertex oracle") {
  Rng rng(13);
  std::uniform_int_distribution<int> denom(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const QuotientSpace q = random_quotient(rng, 2, 5, 1);
    const auto& s = q.base();
    const double p = 1.0 + trial % 3;
    const int D = denom(rng);
    const auto a = composition(rng, D, s.size());
    const auto b = composition(rng, D, s.size());
    const auto w = wasserstein(s, Measure(as_weights(a, D)), Measure(as_weights(b, D)), p);
    const double oracle = transport_vertex_oracle(cost_table(s, p), a, b, D);
    CHECK(std::abs(w.cost - oracle) <= 1e-10);
  }
}

TEST_CASE("solve_transportation handles unbalanced supports") {
  Matrix cost(3, 4);
  cost << 4, 1, 3, 2,
          2, 5, 1, 6,
          3, 3, 3, 3;
  Vector supply(3), demand(4);
  supply << 0.5, 0.5, 0.0;
  demand << 0.0, 0.25, 0.25, 0.5;
  const auto sol = solve_transportation(cost, supply, demand);
  CHECK(sol.plan.rowwise().sum().isApprox(supply, 1e-15));
  CHECK(sol.plan.colwise().sum().transpose().isApprox(demand, 1e-15));
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) CHECK(sol.u(i) + sol.v(j) <= cost(i, j) + 1e-12);
  const double oracle = transport_vertex_oracle(cost, {2, 2, 0}, {0, 1, 1, 2}, 4);
  CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("cp_transform examples") {
  const auto s = two_points();
  const Vector zero = Vector::Zero(2);
  CHECK(cp_transform(s, zero, 2.0) == zero);
  Vector psi(2);
  psi << 0, 3;
  const Vector t = cp_transform(s, psi, 2.0);
  CHECK(t(0) == -2.0);
  CHECK(t(1) == -3.0);

  Vector partial(2);
  partial << 0.0, -kInf;
  const Vector tp = cp_transform(s, partial, 2.0);
  CHECK(tp(0) == 0.0);
  CHECK(tp(1) == 1.0);
  Vector up(2);
  up << kInf, 0.0;
  CHECK(cp_transform(s, up, 2.0)(1) == -kInf);
}

TEST_CASE("triple c-transform equals the single transform exactly") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const QuotientSpace q = random_quotient(rng, 1, 9, 1);
    const auto& s = q.base();
    const double p = 1.0 + trial % 3;
    const Vector psi = random_vector(rng, s.size(), -3.0, 3.0);
    const Vector c1 = cp_transform(s, psi, p);
    const Vector c3 = cp_transform(s, cp_transform(s, c1, p), p);
    CHECK(c3 == c1);
  }
}

TEST_CASE("cp_superdifferential") {
  const auto line = line_space({0.0, 1.0, 2.0});
  const auto diag = cp_superdifferential(line, Vector::Zero(3), 2.0);
  for (Index x = 0; x < 3; ++x)
    CHECK(std::find(diag.begin(), diag.end(), std::make_pair(x, x)) != diag.end());

  // phi = d^2(., y0) is the transform of the indicator-like psi at y0 = 2.
  Vector psi = Vector::Constant(3, -kInf);
  psi(2) = 0.0;
  const Vector phi = cp_transform(line, psi, 2.0);
  const auto pairs = cp_superdifferential(line, phi, 2.0);
  for (Index x = 0; x < 3; ++x)
    CHECK(std::find(pairs.begin(), pairs.end(), std::make_pair(x, Index{2})) != pairs.end());

  Vector bumpy(3);
  bumpy << 0, 5, 0;
  CHECK(error_code([&] { cp_superdifferential(line, bumpy, 2.0); }) ==
        ErrorCode::NotCpConcave);
}

TEST_CASE("cyclical monotonicity") {
  const auto line = line_space({0.0, 1.0, 2.0, 3.0});
  CHECK(check_cyclical_monotonicity(line, {{0, 3}}, 2.0, 2).holds);
  const auto res = check_cyclical_monotonicity(line, {{0, 3}, {1, 2}}, 2.0, 2);
  CHECK_FALSE(res.holds);
  CHECK(res.violating_cycle.size() == 2);
  CHECK(res.improvement == doctest::Approx(2.0));
  CHECK(check_cyclical_monotonicity(line, {{0, 2}, {1, 3}}, 2.0, 2).holds);

  std::vector<std::pair<Index, Index>> many;
  for (Index x = 0; x < 4; ++x)
    for (Index y = 0; y < 3; ++y) many.emplace_back(x, y);
  CHECK(error_code([&] { check_cyclical_monotonicity(line, many, 2.0, 5, 1e-9, 100); }) ==
        ErrorCode::BudgetExceeded);
  CHECK(error_code([&] { check_cyclical_monotonicity(line, many, 2.0, 1); }) ==
        ErrorCode::Validation);
}
