#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "eqot/core_spaces.hpp"

namespace eqot {

/// Probability weights on the points of a space.
class Measure {
 public:
  /// Throws Validation unless the weights are nonnegative and sum to 1
  /// within 1e-12.
  explicit Measure(Vector weights);

  /// Normalizes nonnegative weights with a positive total.
  static Measure normalized(const Vector& weights);
  static Measure dirac(Index n, Index x);
  /// The reference mass divided by its total.
  static Measure reference(const FiniteMetricMeasureSpace& space);

  Index size() const { return static_cast<Index>(weights_.size()); }
  double operator()(Index x) const { return weights_(x); }
  const Vector& weights() const { return weights_; }

  /// Density with respect to the reference mass of `space`.
  Vector density(const FiniteMetricMeasureSpace& space) const;

 private:
  Vector weights_;
};

/// A transport plan together with the cost exponent it was built for.
struct Coupling {
  Matrix plan;
  double p = 2.0;

  Vector first_marginal() const { return plan.rowwise().sum(); }
  Vector second_marginal() const { return plan.colwise().sum().transpose(); }
  /// Sum of plan(x,y) * cost(x,y).
  double cost(const Matrix& cost_table) const;
  /// Max absolute deviation of both marginals from the given measures.
  double marginal_residual(const Measure& mu0, const Measure& mu1) const;
  /// Pairs with positive plan mass, in lexicographic order.
  std::vector<std::pair<Index, Index>> support() const;
};

/// Kantorovich potentials phi (first space) and psi (second space).
struct PotentialPair {
  Vector phi;
  Vector psi;

  /// Max over pairs of phi(x) + psi(y) - cost(x,y); feasible iff <= tol.
  double max_violation(const Matrix& cost_table) const;
  double objective(const Measure& mu0, const Measure& mu1) const;
};

/// cost(x,y) = d(x,y)^p.
Matrix cost_table(const FiniteMetricMeasureSpace& space, double p);

/// Optimal solution of a balanced transportation problem.
struct TransportSolution {
  Matrix plan;
  Vector u;  ///< row potentials
  Vector v;  ///< column potentials
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Exact transportation simplex on a dense cost table (north-west corner
/// start, MODI potentials, Bland's rule: the lexicographically first cell
/// with negative reduced cost enters, ties for leaving go to the smallest
/// cell index). Supplies and demands must be nonnegative with equal totals.
/// Zero-mass rows and columns are removed before pivoting and receive
/// c-transform potentials afterwards, so the duals are feasible everywhere.
TransportSolution solve_transportation(const Matrix& cost, const Vector& supply,
                                       const Vector& demand);

struct WassersteinResult {
  double value = 0.0;  ///< W_p
  double cost = 0.0;   ///< W_p^p, the LP optimum
  Coupling coupling;
  PotentialPair potentials;
  double duality_gap = 0.0;  ///< |primal - dual| / max(1, |primal|)
};

/// W_p between two probability measures on the same space, p >= 1.
/// Throws DimensionMismatch, Validation (p < 1) or SolverFailure.
WassersteinResult wasserstein(const FiniteMetricMeasureSpace& space,
                              const Measure& mu0, const Measure& mu1,
                              double p = 2.0);

/// psi^{c_p}(x) = min_y (d(x,y)^p - psi(y)) with IEEE infinities standing in
/// for the extended reals: a -inf entry of psi contributes +inf and is
/// ignored unless every entry is -inf. A +inf entry yields -inf.
Vector cp_transform(const FiniteMetricMeasureSpace& space, const Vector& psi,
                    double p = 2.0);

/// Pairs (x, y) with phi(x) + phi^{c_p}(y) = d(x,y)^p within tol, after
/// certifying phi = (phi^{c_p})^{c_p} within tol. Throws NotCpConcave.
std::vector<std::pair<Index, Index>> cp_superdifferential(
    const FiniteMetricMeasureSpace& space, const Vector& phi, double p = 2.0,
    double tol = kSolverTolerance);

struct CyclicalMonotonicityResult {
  bool holds = true;
  /// Indices into the input pair list; pair i is reassigned to the second
  /// coordinate of pair i+1 (cyclically).
  std::vector<std::size_t> violating_cycle;
  double improvement = 0.0;
  std::size_t cycles_checked = 0;
};

inline constexpr std::size_t kDefaultCycleBudget = 20'000'000;

/// Exhaustive search over cycles of length 2..max_cycle of distinct pairs.
/// Throws BudgetExceeded when the cycle count exceeds `budget` and
/// Validation when max_cycle < 2.
CyclicalMonotonicityResult check_cyclical_monotonicity(
    const FiniteMetricMeasureSpace& space,
    const std::vector<std::pair<Index, Index>>& pairs, double p,
    std::size_t max_cycle, double tol = kSolverTolerance,
    std::size_t budget = kDefaultCycleBudget);

}  // namespace eqot
