#include <doctest.h>

#include <cmath>
#include <limits>

#include "eqot/graph_calculus.hpp"
#include "eqot/sampling.hpp"
#include "expect_error.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace eqot;
using namespace eqot::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

WeightedGraph k2() {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  return WeightedGraph(w, Vector::Ones(2));
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(xs.size());
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

PermutationGroup cube_swaps() {
  return PermutationGroup::generate(8, {cube_coordinate_swap(0, 1), cube_coordinate_swap(1, 2)});
}

}  // namespace

TEST_CASE("graph validation") {
  Matrix asym(2, 2);
  asym << 0, 1, 2, 0;
  CHECK(error_code([&] { WeightedGraph(asym, Vector::Ones(2)); }) == ErrorCode::Validation);
  Matrix loop(2, 2);
  loop << 1, 1, 1, 0;
  CHECK(error_code([&] { WeightedGraph(loop, Vector::Ones(2)); }) == ErrorCode::Validation);
  CHECK(error_code([&] { WeightedGraph(k2().omega(), Vector::Zero(2)); }) ==
        ErrorCode::Validation);
  Matrix split = Matrix::Zero(3, 3);
  split(0, 1) = split(1, 0) = 2.0;
  const auto g = WeightedGraph::with_degree_measure({"a", "b", "c"}, split);
  CHECK_FALSE(g.connected());
  CHECK(g.measure(0) == 2.0);
  CHECK(g.measure(2) == 1.0);
}

TEST_CASE("laplacian, gamma and gamma2 on K2") {
  const auto g = k2();
  const Vector f = vec({0, 1});
  CHECK(laplacian(g, f) == vec({1, -1}));
  CHECK(gamma(g, f, f) == vec({0.5, 0.5}));
  CHECK(gamma2(g, f, f) == vec({1, 1}));
  const Vector c = vec({3, 3});
  CHECK(laplacian(g, c) == Vector::Zero(2));
  CHECK(gamma(g, c, f) == Vector::Zero(2));
  CHECK(gamma2(g, c, c) == Vector::Zero(2));
}

TEST_CASE("pointwise operators agree with the vector forms") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_invariant_graph(rng, 2, 10, 8, false);
    const auto& g = inst.graph;
    const Vector f = random_vector(rng, g.size(), -1, 1);
    const Vector h = random_vector(rng, g.size(), -1, 1);
    const Vector l = laplacian(g, f), ga = gamma(g, f, h), g2 = gamma2(g, f, h);
    for (Index x = 0; x < g.size(); ++x) {
      CHECK(std::abs(laplacian_at(g, x, f) - l(x)) <= 1e-12);
      CHECK(std::abs(gamma_at(g, x, f, h) - ga(x)) <= 1e-12);
      CHECK(std::abs(gamma2_at(g, x, f, h) - g2(x)) <= 1e-12);
    }
  }
}

TEST_CASE("algebraic identities hold exactly on dyadic graphs") {
  Rng rng(73);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_invariant_graph(rng, 2, 10, 8, true);
    const auto& g = inst.graph;
    const Vector f = random_integer_vector(rng, g.size(), -8, 8);
    const Vector h = random_integer_vector(rng, g.size(), -8, 8);
    const Vector fh = f.cwiseProduct(h);
    const Vector lhs = 2.0 * gamma(g, f, h);
    const Vector rhs = laplacian(g, fh) - f.cwiseProduct(laplacian(g, h)) -
                       h.cwiseProduct(laplacian(g, f));
    CHECK(lhs == rhs);
    CHECK(laplacian(g, f).cwiseProduct(g.measures()).sum() == 0.0);
    CHECK(gamma(g, f, h) == gamma(g, h, f));
    CHECK(gamma2(g, f, h) == gamma2(g, h, f));
    CHECK((gamma(g, f, f).array() >= 0.0).all());
    const Vector f2 = 3.0 * f + h;
    CHECK(gamma2(g, f2, h) == 3.0 * gamma2(g, f, h) + gamma2(g, h, h));
  }
}

TEST_CASE("two-ball") {
  const auto c6 = cycle_graph(6);
  const TwoBall b = two_ball(c6, 0);
  CHECK(b.sphere1 == std::vector<Index>{1, 5});
  CHECK(b.sphere2 == std::vector<Index>{2, 4});
}

TEST_CASE("CD curvature of K2 and of an isolated vertex") {
  const auto g = k2();
  CHECK(std::abs(cd_curvature(g, 0, kInf) - 2.0) <= 1e-9);
  CHECK(std::abs(cd_curvature(g, 1, kInf) - 2.0) <= 1e-9);
  Matrix split = Matrix::Zero(3, 3);
  split(0, 1) = split(1, 0) = 1.0;
  const WeightedGraph iso(split, Vector::Ones(3));
  CHECK(cd_curvature(iso, 2, kInf) == kInf);
  CHECK(cd_curvature(iso, 2, 1.0) == kInf);
  CHECK(error_code([&] { cd_curvature(g, 0, 0.5); }) == ErrorCode::Validation);
}

TEST_CASE("CD curvature of the 3-cube matches the sampling oracle") {
  const auto cube = cube_graph();
  std::mt19937_64 rng(79);
  for (double N : {kInf, 3.0}) {
    const double k = cd_curvature(cube, 0, N);
    const double oracle = rayleigh_oracle(cube, 0, N, rng, 2000);
    CHECK(oracle >= k - 1e-6);
    CHECK(std::abs(oracle - k) <= 1e-6);
  }
}

TEST_CASE("CD curvature is monotone in N and automorphism invariant") {
  Rng rng(83);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = random_invariant_graph(rng, 2, 9, 8, false);
    const auto& g = inst.graph;
    for (Index x = 0; x < g.size(); ++x) {
      const double k1 = cd_curvature(g, x, 1.0);
      const double k2v = cd_curvature(g, x, 2.0);
      const double ki = cd_curvature(g, x, kInf);
      CHECK(k1 <= k2v + 1e-9);
      CHECK(k2v <= ki + 1e-9);
      for (std::size_t e = 0; e < inst.group.order(); ++e) {
        const double kg = cd_curvature(g, inst.group.apply(e, x), kInf);
        if (std::isinf(ki)) CHECK(kg == ki);
        else CHECK(std::abs(kg - ki) <= 1e-9 * std::max(1.0, std::abs(ki)));
      }
    }
  }
}

TEST_CASE("CD curvature agrees with the sampling oracle on small graphs") {
  Rng rng(89);
  std::mt19937_64 orng(97);
  for (int trial = 0; trial < 6; ++trial) {
    const auto inst = random_invariant_graph(rng, 3, 7, 4, false);
    const auto& g = inst.graph;
    for (Index x = 0; x < g.size(); ++x) {
      const double k = cd_curvature(g, x, 2.0);
      const double oracle = rayleigh_oracle(g, x, 2.0, orng, 300);
      if (std::isinf(k)) {
        CHECK(oracle == k);
        continue;
      }
      CHECK(oracle >= k - 1e-6);
      CHECK(std::abs(oracle - k) <= 1e-4);
    }
  }
}

TEST_CASE("CDE check") {
  const auto g = k2();
  const Vector c = vec({2, 2});
  CHECK(cde_check(g, 0, 5.0, 2.0, c).slack == 0.0);
  const Vector f = vec({1, 2});
  for (Index x = 0; x < 2; ++x) {
    const auto r = cde_check(g, x, 0.0, kInf, f);
    CHECK(r.holds);
    CHECK(r.slack == doctest::Approx(9.0 / 8.0).epsilon(1e-15));
  }
  const auto bad = cde_check(g, 0, 10.0, kInf, f);
  CHECK_FALSE(bad.holds);
  CHECK(bad.slack < 0.0);
  CHECK(error_code([&] { cde_check(g, 0, 0.0, kInf, vec({0, 1})); }) ==
        ErrorCode::NonpositiveFunction);

  const auto sweep = cde_sweep(g, 0.0, kInf, {f, vec({2, 1}), c});
  CHECK(sweep.holds);
  CHECK(sweep.min_slack == 0.0);
  CHECK(sweep.worst_function == 2);
}

TEST_CASE("Sobolev norms") {
  const auto g = k2();
  const auto z = sobolev_norms(g, Vector::Zero(2), 2.0);
  CHECK(z.lp_pow == 0.0);
  CHECK(z.w1p_pow == 0.0);
  const auto s = sobolev_norms(g, vec({0, 1}), 2.0);
  CHECK(s.lp_pow == 1.0);
  CHECK(s.gradient_pow == 1.0);
  CHECK(s.w1p_pow == 2.0);
  const auto scaled = sobolev_norms(g, vec({0, -4}), 2.0);
  CHECK(scaled.w1p_pow == 16.0 * s.w1p_pow);
  const auto p3 = sobolev_norms(cycle_graph(5), vec({1, -2, 0.5, 0, 3}), 3.0);
  const auto p3s = sobolev_norms(cycle_graph(5), vec({-2, 4, -1, 0, -6}), 3.0);
  CHECK(p3s.w1p_pow == doctest::Approx(8.0 * p3.w1p_pow).epsilon(1e-14));
}

TEST_CASE("quotient graphs") {
  const auto c4 = cycle_graph(4);
  const QuotientGraph triv = quotient_graph(c4, PermutationGroup::trivial(4));
  CHECK(triv.graph.omega() == c4.omega());
  CHECK(triv.graph.measures() == c4.measures());

  const QuotientGraph q = quotient_graph(c4, PermutationGroup::generate(4, {rotation(4, 2)}));
  REQUIRE(q.graph.size() == 2);
  CHECK(q.graph.weight(0, 1) == 4.0);
  CHECK(q.graph.weight(0, 0) == 0.0);
  CHECK(q.graph.measure(0) == 2.0);
  CHECK(q.graph.measure(1) == 2.0);

  const QuotientGraph single = quotient_graph(k2(), PermutationGroup::generate(2, {{1, 0}}));
  CHECK(single.graph.size() == 1);
  CHECK(single.graph.neighbors(0).empty());

  Matrix path = Matrix::Zero(3, 3);
  path(0, 1) = path(1, 0) = 1.0;
  path(1, 2) = path(2, 1) = 2.0;
  const auto flip = PermutationGroup::generate(3, {{2, 1, 0}});
  CHECK(error_code([&] { quotient_graph(WeightedGraph(path, Vector::Ones(3)), flip); }) ==
        ErrorCode::ActionNotWeightPreserving);
  Matrix even = Matrix::Zero(3, 3);
  even(0, 1) = even(1, 0) = even(1, 2) = even(2, 1) = 1.0;
  CHECK(error_code([&] { quotient_graph(WeightedGraph(even, vec({1, 1, 2})), flip); }) ==
        ErrorCode::ActionNotMeasurePreserving);
}

TEST_CASE("lift commutation") {
  const auto c4 = cycle_graph(4);
  const auto rot = PermutationGroup::generate(4, {rotation(4, 2)});
  const QuotientGraph q = quotient_graph(c4, rot);
  const Vector fs = vec({0, 1});
  CHECK(laplacian(q.graph, fs) == vec({2, -2}));
  CHECK(laplacian(c4, q.lift(fs)) == vec({2, -2, 2, -2}));
  for (const auto& c : verify_lift_commutation(c4, rot, fs, vec({1, -1}))) {
    CHECK_MESSAGE(c.pass, c.name);
  }

  for (const auto& c : verify_lift_commutation(c4, PermutationGroup::trivial(4),
                                               vec({1, 2, 3, 4}), vec({0, 1, 0, -1}))) {
    CHECK_MESSAGE(c.diff == 0.0, c.name);
  }

  Rng rng(101);
  const auto cube = cube_graph();
  for (const auto& group :
       {PermutationGroup::generate(8, {cube_coordinate_swap(0, 1)}), cube_swaps()}) {
    const QuotientGraph qc = quotient_graph(cube, group);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector f = random_vector(rng, qc.graph.size(), -1, 1);
      const Vector h = random_vector(rng, qc.graph.size(), -1, 1);
      for (double p : {1.0, 2.0, 3.0})
        for (const auto& c : verify_lift_commutation(cube, group, f, h, p))
          CHECK_MESSAGE(c.pass, c.name);
    }
  }
}

TEST_CASE("CD quotient bound") {
  const auto cube = cube_graph();
  const auto triv = verify_cd_quotient(cube, PermutationGroup::trivial(8), kInf);
  CHECK(triv.K_star == triv.K);
  for (double N : {kInf, 2.0}) {
    const auto r = verify_cd_quotient(cube, cube_swaps(), N);
    CHECK(r.check.pass);
    CHECK(r.K_star >= r.K - 1e-7);
  }
}
