#include "eqot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eqot/error.hpp"

namespace eqot {

// ---------------------------------------------------------------------------
// Measure

Measure::Measure(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0)
    throw Error(ErrorCode::Validation, "measure has no points");
  double total = 0.0;
  for (Index x = 0; x < size(); ++x) {
    if (!std::isfinite(weights_(x)) || weights_(x) < 0.0)
      throw Error(ErrorCode::Validation,
                  "measure weight at " + std::to_string(x) +
                      " must be finite and nonnegative");
    total += weights_(x);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::Validation,
                "measure weights must sum to 1 (got " + std::to_string(total) +
                    ")");
}

Measure Measure::normalized(const Vector& weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || (weights.array() < 0.0).any())
    throw Error(ErrorCode::Validation,
                "weights must be nonnegative with positive total");
  return Measure(weights / total);
}

Measure Measure::dirac(Index n, Index x) {
  Vector w = Vector::Zero(n);
  w(x) = 1.0;
  return Measure(std::move(w));
}

Measure Measure::reference(const FiniteMetricMeasureSpace& space) {
  return normalized(space.masses());
}

Vector Measure::density(const FiniteMetricMeasureSpace& space) const {
  if (space.size() != size())
    throw Error(ErrorCode::DimensionMismatch,
                "measure and space have different sizes");
  return weights_.cwiseQuotient(space.masses());
}

// ---------------------------------------------------------------------------
// Coupling and potentials

double Coupling::cost(const Matrix& cost_table) const {
  double total = 0.0;
  for (Index i = 0; i < static_cast<Index>(plan.rows()); ++i)
    for (Index j = 0; j < static_cast<Index>(plan.cols()); ++j)
      if (plan(i, j) != 0.0) total += plan(i, j) * cost_table(i, j);
  return total;
}

double Coupling::marginal_residual(const Measure& mu0,
                                   const Measure& mu1) const {
  const double r0 = (first_marginal() - mu0.weights()).cwiseAbs().maxCoeff();
  const double r1 = (second_marginal() - mu1.weights()).cwiseAbs().maxCoeff();
  return std::max(r0, r1);
}

std::vector<std::pair<Index, Index>> Coupling::support() const {
  std::vector<std::pair<Index, Index>> out;
  for (Index i = 0; i < static_cast<Index>(plan.rows()); ++i)
    for (Index j = 0; j < static_cast<Index>(plan.cols()); ++j)
      if (plan(i, j) > 0.0) out.emplace_back(i, j);
  return out;
}

double PotentialPair::max_violation(const Matrix& cost_table) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < static_cast<Index>(phi.size()); ++i)
    for (Index j = 0; j < static_cast<Index>(psi.size()); ++j)
      worst = std::max(worst, phi(i) + psi(j) - cost_table(i, j));
  return worst;
}

double PotentialPair::objective(const Measure& mu0, const Measure& mu1) const {
  double total = 0.0;
  for (Index i = 0; i < mu0.size(); ++i)
    if (mu0(i) != 0.0) total += phi(i) * mu0(i);
  for (Index j = 0; j < mu1.size(); ++j)
    if (mu1(j) != 0.0) total += psi(j) * mu1(j);
  return total;
}

Matrix cost_table(const FiniteMetricMeasureSpace& space, double p) {
  const Index n = space.size();
  Matrix c(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) c(i, j) = std::pow(space.dist(i, j), p);
  return c;
}

// ---------------------------------------------------------------------------
// Wasserstein

WassersteinResult wasserstein(const FiniteMetricMeasureSpace& space,
                              const Measure& mu0, const Measure& mu1,
                              double p) {
  if (mu0.size() != space.size() || mu1.size() != space.size())
    throw Error(ErrorCode::DimensionMismatch,
                "measures must live on the given space");
  if (!(p >= 1.0) || !std::isfinite(p))
    throw Error(ErrorCode::Validation, "cost exponent must satisfy p >= 1");

  const Matrix cost = cost_table(space, p);
  TransportSolution sol =
      solve_transportation(cost, mu0.weights(), mu1.weights());

  WassersteinResult out;
  out.coupling = Coupling{std::move(sol.plan), p};
  out.potentials = PotentialPair{std::move(sol.u), std::move(sol.v)};
  out.cost = std::max(0.0, sol.objective);
  out.value = std::pow(out.cost, 1.0 / p);
  const double dual = out.potentials.objective(mu0, mu1);
  out.duality_gap = std::abs(out.cost - dual) / std::max(1.0, out.cost);
  if (out.duality_gap > kSolverTolerance ||
      out.coupling.marginal_residual(mu0, mu1) > 1e-10)
    throw Error(ErrorCode::SolverFailure,
                "transport solution failed its optimality certificate");
  return out;
}

// ---------------------------------------------------------------------------
// c_p-transforms

Vector cp_transform(const FiniteMetricMeasureSpace& space, const Vector& psi,
                    double p) {
  const Index n = space.size();
  if (static_cast<Index>(psi.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "function length != space size");
  bool all_minus_inf = true;
  for (Index y = 0; y < n; ++y)
    if (!(std::isinf(psi(y)) && psi(y) < 0)) all_minus_inf = false;
  if (all_minus_inf)
    throw Error(ErrorCode::Validation,
                "c_p-transform of the constant -inf function is undefined");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Vector out(n);
  for (Index x = 0; x < n; ++x) {
    double best = kInf;
    for (Index y = 0; y < n; ++y) {
      if (psi(y) == -kInf) continue;  // contributes +inf
      const double term =
          psi(y) == kInf ? -kInf : std::pow(space.dist(x, y), p) - psi(y);
      best = std::min(best, term);
    }
    out(x) = best;
  }
  return out;
}

std::vector<std::pair<Index, Index>> cp_superdifferential(
    const FiniteMetricMeasureSpace& space, const Vector& phi, double p,
    double tol) {
  const Vector phi_c = cp_transform(space, phi, p);
  const Vector phi_cc = cp_transform(space, phi_c, p);
  for (Index x = 0; x < space.size(); ++x) {
    const bool same_inf = std::isinf(phi(x)) && phi(x) == phi_cc(x);
    if (!same_inf && !(std::abs(phi(x) - phi_cc(x)) <= tol))
      throw Error(ErrorCode::NotCpConcave,
                  "phi differs from its double transform at point " +
                      space.label(x));
  }
  std::vector<std::pair<Index, Index>> out;
  for (Index x = 0; x < space.size(); ++x)
    for (Index y = 0; y < space.size(); ++y) {
      if (!std::isfinite(phi(x)) || !std::isfinite(phi_c(y))) continue;
      if (std::abs(phi(x) + phi_c(y) - std::pow(space.dist(x, y), p)) <= tol)
        out.emplace_back(x, y);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Cyclical monotonicity

namespace {

// Number of cycles on k distinct items out of n, up to rotation.
double cycle_count(std::size_t n, std::size_t k) {
  double count = 1.0;
  for (std::size_t i = 0; i < k; ++i) count *= static_cast<double>(n - i);
  return count / static_cast<double>(k);
}

}  // namespace

CyclicalMonotonicityResult check_cyclical_monotonicity(
    const FiniteMetricMeasureSpace& space,
    const std::vector<std::pair<Index, Index>>& pairs, double p,
    std::size_t max_cycle, double tol, std::size_t budget) {
  if (max_cycle < 2)
    throw Error(ErrorCode::Validation, "max_cycle must be at least 2");
  for (const auto& [x, y] : pairs)
    if (x >= space.size() || y >= space.size())
      throw Error(ErrorCode::DimensionMismatch, "pair index out of range");

  const std::size_t n = pairs.size();
  const std::size_t longest = std::min(max_cycle, n);
  double total = 0.0;
  for (std::size_t k = 2; k <= longest; ++k) total += cycle_count(n, k);
  if (total > static_cast<double>(budget))
    throw Error(ErrorCode::BudgetExceeded,
                std::to_string(static_cast<long long>(total)) +
                    " cycles exceed the budget of " + std::to_string(budget));

  const Matrix cost = cost_table(space, p);
  CyclicalMonotonicityResult result;
  std::vector<std::size_t> cycle;
  std::vector<bool> used(n, false);

  // Depth-first over sequences whose first element is their minimum.
  auto extend = [&](auto&& self, double original, double shifted) -> bool {
    const std::size_t len = cycle.size();
    if (len >= 2) {
      ++result.cycles_checked;
      const double closing =
          shifted + cost(pairs[cycle.back()].first, pairs[cycle.front()].second);
      if (closing < original - tol) {
        result.holds = false;
        result.violating_cycle = cycle;
        result.improvement = original - closing;
        return true;
      }
    }
    if (len == longest) return false;
    for (std::size_t next = cycle.front() + 1; next < n; ++next) {
      if (used[next]) continue;
      used[next] = true;
      const double step = cost(pairs[cycle.back()].first, pairs[next].second);
      cycle.push_back(next);
      const bool found = self(self,
                              original + cost(pairs[next].first,
                                              pairs[next].second),
                              shifted + step);
      cycle.pop_back();
      used[next] = false;
      if (found) return true;
    }
    return false;
  };

  for (std::size_t first = 0; first < n; ++first) {
    cycle.assign(1, first);
    used[first] = true;
    const bool found =
        extend(extend, cost(pairs[first].first, pairs[first].second), 0.0);
    used[first] = false;
    if (found) break;
  }
  return result;
}

}  // namespace eqot
