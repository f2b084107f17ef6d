#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "eqot/discrete_flow.hpp"
#include "eqot/sampling.hpp"
#include "expect_error.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace eqot;
using namespace eqot::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> xs) {
  Vector v(xs.size());
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ReversibleChain two_state() {
  Matrix k(2, 2);
  k << 0, 1, 1, 0;
  return ReversibleChain(k, vec({0.5, 0.5}));
}

}  // namespace

TEST_CASE("reversible chain validation") {
  Matrix directed(3, 3);
  directed << 0, 1, 0,
              0, 0, 1,
              1, 0, 0;
  CHECK(error_code([&] { ReversibleChain c(directed); }) == ErrorCode::Validation);
  Matrix reducible = Matrix::Identity(2, 2);
  CHECK(error_code([&] { ReversibleChain c(reducible); }) == ErrorCode::Validation);
  Matrix birth(3, 3);
  birth << 0.5, 0.5, 0.0,
           0.25, 0.5, 0.25,
           0.0, 0.5, 0.5;
  const ReversibleChain c(birth);
  CHECK((c.stationary() - vec({0.25, 0.5, 0.25})).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(error_code([&] { ReversibleChain bad(birth, vec({0.2, 0.6, 0.2})); }) ==
        ErrorCode::Validation);
}

TEST_CASE("theta examples and properties") {
  Rng rng(111);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = u(rng), t = u(rng), c = u(rng);
    CHECK(theta(s, s) == s);
    CHECK(theta(s, 0.0) == 0.0);
    CHECK(theta(0.0, t) == 0.0);
    CHECK(theta(s, t) == doctest::Approx(theta(t, s)).epsilon(1e-15));
    CHECK(theta(c * s, c * t) == doctest::Approx(c * theta(s, t)).epsilon(1e-14));
    CHECK(theta(s, t) >= std::min(s, t) * (1 - 1e-15));
    CHECK(theta(s, t) <= 0.5 * (s + t) * (1 + 1e-15));
  }
  CHECK(std::abs(theta(std::numbers::e, 1.0) - (std::numbers::e - 1.0)) <= 1e-10);
  CHECK(std::abs(theta_quadrature(std::numbers::e, 1.0) - (std::numbers::e - 1.0)) <= 1e-10);
  CHECK(theta_quadrature(3.0, 0.0) == 0.0);
  CHECK(std::abs(theta(1.0 + 1e-7, 1.0) - (1.0 + 0.5e-7)) <= 1e-15);
  CHECK(error_code([] { theta(-1.0, 1.0); }) == ErrorCode::NegativeInput);
}

TEST_CASE("theta derivatives match finite differences") {
  Rng rng(113);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = u(rng);
    const double t = trial % 4 == 0 ? s * (1.0 + 1e-3 * u(rng)) : u(rng);
    const auto d = theta_derivatives(s, t);
    const double h = 1e-5;
    CHECK(d.value == doctest::Approx(theta(s, t)).epsilon(1e-13));
    CHECK(d.ds == doctest::Approx((theta(s + h, t) - theta(s - h, t)) / (2 * h)).epsilon(1e-7));
    CHECK(d.dt == doctest::Approx((theta(s, t + h) - theta(s, t - h)) / (2 * h)).epsilon(1e-7));
    const double hh = 1e-4;
    auto ds = [&](double a, double b) { return theta_derivatives(a, b).ds; };
    auto dt = [&](double a, double b) { return theta_derivatives(a, b).dt; };
    CHECK(d.dss == doctest::Approx((ds(s + hh, t) - ds(s - hh, t)) / (2 * hh)).epsilon(1e-5).scale(1.0));
    CHECK(d.dst == doctest::Approx((ds(s, t + hh) - ds(s, t - hh)) / (2 * hh)).epsilon(1e-5).scale(1.0));
    CHECK(d.dtt == doctest::Approx((dt(s, t + hh) - dt(s, t - hh)) / (2 * hh)).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("alpha branches") {
  CHECK(alpha(0.0, 0.0, 0.0) == 0.0);
  CHECK(alpha(2.0, 1.0, 1.0) == 4.0);
  CHECK(alpha(1.0, 0.0, 0.0) == kInf);
  CHECK(alpha(1.0, 2.0, 0.0) == kInf);
}

TEST_CASE("action examples and convexity") {
  const auto c = two_state();
  CHECK(action(c, vec({1, 1}), Matrix::Zero(2, 2)) == 0.0);
  Matrix V = Matrix::Zero(2, 2);
  V(0, 1) = 1.0;
  CHECK(action(c, vec({1, 1}), V) == 0.25);

  Rng rng(127);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  const auto walk = cycle_walk(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector r0 = random_density(rng, walk.stationary(), 4.0);
    const Vector r1 = random_density(rng, walk.stationary(), 4.0);
    const Matrix V0 = Matrix::Random(5, 5);
    const Matrix V1 = Matrix::Random(5, 5);
    const double l = lam(rng);
    const double mixed = action(walk, l * r0 + (1 - l) * r1, l * V0 + (1 - l) * V1);
    const double chord = l * action(walk, r0, V0) + (1 - l) * action(walk, r1, V1);
    CHECK(mixed <= chord + 1e-10 * std::max(1.0, chord));
  }
}

TEST_CASE("continuity residual") {
  const auto c = two_state();
  DensityPath still{{0.0, 0.5, 1.0}, {vec({1.2, 0.8}), vec({1.2, 0.8}), vec({1.2, 0.8})},
                    {Matrix::Zero(2, 2), Matrix::Zero(2, 2)}};
  CHECK(continuity_residual(c, still).cwiseAbs().maxCoeff() == 0.0);

  DensityPath moving = still;
  moving.rho[2] = vec({0.8, 1.2});
  CHECK(continuity_residual(c, moving).cwiseAbs().maxCoeff() > 0.0);

  // rho(t) = (1 + e(1 - 2t), 1 - e(1 - 2t)): drho_a/dt = -2e, balanced by
  // V(a,b) - V(b,a) = 4e.
  const double e = 0.3;
  DensityPath linear;
  Matrix V = Matrix::Zero(2, 2);
  V(0, 1) = 2 * e;
  V(1, 0) = -2 * e;
  for (int k = 0; k <= 4; ++k) {
    const double t = k / 4.0;
    linear.times.push_back(t);
    linear.rho.push_back(vec({1 + e * (1 - 2 * t), 1 - e * (1 - 2 * t)}));
    if (k < 4) linear.V.push_back(V);
  }
  CHECK(continuity_residual(c, linear).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("entropy of the Markov chain") {
  const auto c = two_state();
  CHECK(entropy_mm(c, vec({1, 1})) == 0.0);
  CHECK(entropy_mm(c, vec({2, 0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  Rng rng(131);
  const auto walk = cycle_walk(6);
  for (int trial = 0; trial < 50; ++trial)
    CHECK(entropy_mm(walk, random_density(rng, walk.stationary(), 3.0)) >= 0.0);
}

TEST_CASE("w_distance basics") {
  const auto c = two_state();
  const auto same = w_distance(c, vec({1.2, 0.8}), vec({1.2, 0.8}));
  CHECK(same.converged);
  CHECK(same.value <= 1e-12);
  for (const Vector& r : same.path.rho) CHECK((r - vec({1.2, 0.8})).cwiseAbs().maxCoeff() <= 1e-12);

  const double eps = 0.2;
  const auto res = w_distance(c, vec({1 + eps, 1 - eps}), vec({1 - eps, 1 + eps}),
                              FlowOptions{32, 1e-10});
  CHECK(res.converged);
  CHECK(res.residual <= 1e-10);
  CHECK(continuity_residual(c, res.path).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(path_action(c, res.path) - res.action) <= 1e-10);
  CHECK(std::abs(res.value - two_state_w_oracle(eps)) <= 1e-4);

  CHECK(error_code([&] { w_distance(c, vec({1.5, 0.8}), vec({1, 1})); }) ==
        ErrorCode::Validation);
}

TEST_CASE("zero densities are mollified") {
  const auto walk = cycle_walk(4);
  const auto res = w_distance(walk, vec({2, 0, 2, 0}), vec({1, 1, 1, 1}), FlowOptions{8});
  CHECK(res.mollified);
  CHECK(std::isfinite(res.value));
}

TEST_CASE("grid refinement does not increase the value") {
  Rng rng(137);
  const auto walk = cycle_walk(5);
  for (int trial = 0; trial < 3; ++trial) {
    const Vector r0 = random_density(rng, walk.stationary(), 3.0);
    const Vector r1 = random_density(rng, walk.stationary(), 3.0);
    double prev = kInf;
    for (std::size_t grid : {8, 16, 32}) {
      const auto res = w_distance(walk, r0, r1, FlowOptions{grid, 1e-10});
      CHECK(res.converged);
      CHECK(res.value <= prev + 1e-8);
      prev = res.value;
    }
  }
}

TEST_CASE("w_distance is invariant under relabeling") {
  Matrix k(3, 3);
  k << 0.2, 0.8, 0.0,
       0.4, 0.2, 0.4,
       0.0, 0.8, 0.2;
  const ReversibleChain c(k);
  const Permutation sigma{2, 0, 1};
  Matrix kp(3, 3);
  Vector pp(3);
  for (Index x = 0; x < 3; ++x) {
    pp(sigma[x]) = c.pi(x);
    for (Index y = 0; y < 3; ++y) kp(sigma[x], sigma[y]) = k(x, y);
  }
  const ReversibleChain cp(kp, pp);
  Rng rng(139);
  const Vector r0 = random_density(rng, c.stationary(), 3.0);
  const Vector r1 = random_density(rng, c.stationary(), 3.0);
  Vector p0(3), p1(3);
  for (Index x = 0; x < 3; ++x) {
    p0(sigma[x]) = r0(x);
    p1(sigma[x]) = r1(x);
  }
  const double a = w_distance(c, r0, r1, FlowOptions{16, 1e-10}).value;
  const double b = w_distance(cp, p0, p1, FlowOptions{16, 1e-10}).value;
  CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, a));
}

TEST_CASE("group averages") {
  const auto walk = cycle_walk(4);
  const auto rot = PermutationGroup::generate(4, {rotation(4, 2)});
  Rng rng(149);
  SUBCASE("invariant pairs are fixed points") {
    const Vector rho = vec({1.2, 0.8, 1.2, 0.8});
    Matrix V = Matrix::Zero(4, 4);
    for (Index x = 0; x < 4; ++x) {
      V(x, (x + 1) % 4) = 0.5 + 0.25 * (x % 2);
      V((x + 1) % 4, x) = -0.5 - 0.25 * (x % 2);
    }
    const auto avg = g_average(walk, rot, rho, V);
    CHECK(avg.rho == rho);
    CHECK(avg.V == V);
    const auto triv = g_average(walk, PermutationGroup::trivial(4), random_density(rng, walk.stationary(), 2.0), V);
    CHECK(triv.V == V);
  }
  SUBCASE("averaging never increases the action") {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector rho = random_density(rng, walk.stationary(), 4.0);
      const Matrix V = Matrix::Random(4, 4);
      const auto avg = g_average(walk, rot, rho, V);
      CHECK(action(walk, avg.rho, avg.V) <= action(walk, rho, V) + 1e-12);
    }
  }
  SUBCASE("averaging keeps continuity residuals") {
    const auto res = w_distance(walk, random_density(rng, walk.stationary(), 2.0),
                                random_density(rng, walk.stationary(), 2.0), FlowOptions{8});
    const DensityPath avg = g_average(walk, rot, res.path);
    CHECK(continuity_residual(walk, avg).cwiseAbs().maxCoeff() <=
          continuity_residual(walk, res.path).cwiseAbs().maxCoeff() + 1e-12);
  }
  SUBCASE("groups must preserve the kernel") {
    Matrix birth(3, 3);
    birth << 0.5, 0.5, 0.0,
             0.25, 0.5, 0.25,
             0.0, 0.5, 0.5;
    const ReversibleChain c(birth);
    CHECK(error_code([&] {
            g_average(c, PermutationGroup::generate(3, {{1, 0, 2}}), vec({1, 1, 1}),
                      Matrix::Zero(3, 3));
          }) == ErrorCode::GroupNotKernelPreserving);
  }
}

TEST_CASE("quotient chains") {
  const auto walk = cycle_walk(4);
  const auto triv = quotient_chain_mm(walk, PermutationGroup::trivial(4));
  CHECK(triv.chain.kernel() == walk.kernel());

  const auto two = quotient_chain_mm(two_state(), PermutationGroup::generate(2, {{1, 0}}));
  REQUIRE(two.chain.size() == 1);
  CHECK(two.chain.K(0, 0) == 1.0);

  const auto half = quotient_chain_mm(walk, PermutationGroup::generate(4, {rotation(4, 2)}));
  REQUIRE(half.chain.size() == 2);
  CHECK(half.chain.K(0, 1) == 1.0);
  CHECK(half.chain.K(1, 0) == 1.0);
  CHECK(half.chain.pi(0) == 0.5);
  CHECK(half.lift(vec({3, 4})) == vec({3, 4, 3, 4}));
}

TEST_CASE("quotient isometry") {
  const auto walk = cycle_walk(4);
  const auto rot = PermutationGroup::generate(4, {rotation(4, 2)});
  const auto same = verify_w_isometry(walk, rot, vec({1.1, 0.9}), vec({1.1, 0.9}));
  CHECK(same.w_base <= 1e-12);
  CHECK(same.w_quotient <= 1e-12);

  const auto r = verify_w_isometry(walk, rot, vec({1.3, 0.7}), vec({0.8, 1.2}));
  for (const auto& c : r.checks) CHECK_MESSAGE(c.pass, c.name);
  CHECK(std::abs(r.w_base - r.w_quotient) <= 1e-3 * r.w_quotient);
}
