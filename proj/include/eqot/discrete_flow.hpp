#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eqot/core_spaces.hpp"
#include "eqot/report.hpp"

namespace eqot {

/// Irreducible row-stochastic kernel K with stationary distribution pi in
/// detailed balance: K(x,y) pi(x) = K(y,x) pi(y).
class ReversibleChain {
 public:
  /// pi is computed from K when absent. Throws Validation on a kernel that
  /// is not stochastic (1e-12), not irreducible, or violates stationarity or
  /// detailed balance (1e-10).
  explicit ReversibleChain(Matrix kernel,
                           std::optional<Vector> stationary = std::nullopt);

  Index size() const { return static_cast<Index>(pi_.size()); }
  const Matrix& kernel() const { return kernel_; }
  const Vector& stationary() const { return pi_; }
  double K(Index x, Index y) const { return kernel_(x, y); }
  double pi(Index x) const { return pi_(x); }

 private:
  Matrix kernel_;
  Vector pi_;
};

/// Logarithmic mean: (s - t) / (log s - log t), theta(s, s) = s and 0 when
/// either argument is 0. Throws NegativeInput.
double theta(double s, double t);

/// First and second partial derivatives of theta at s, t > 0.
struct ThetaDerivatives {
  double value;
  double ds;
  double dt;
  double dss;
  double dst;
  double dtt;
};
ThetaDerivatives theta_derivatives(double s, double t);

/// 0 if theta(s,t) = 0 and x = 0; x^2 / theta(s,t) if theta(s,t) > 0; +inf
/// otherwise.
double alpha(double x, double s, double t);

/// A'(rho, V) = (1/2) sum_{x,y} alpha(V(x,y), rho(x), rho(y)) K(x,y) pi(x).
/// Pairs with K(x,y) = 0 contribute nothing.
double action(const ReversibleChain& chain, const Vector& rho, const Matrix& V);

/// Densities on a time grid (relative to pi) and one momentum table per
/// grid interval.
struct DensityPath {
  std::vector<double> times;
  std::vector<Vector> rho;  ///< rho[k] at times[k]
  std::vector<Matrix> V;    ///< V[k] on [times[k], times[k+1]]
};

/// Residual of (rho_{k+1} - rho_k)/h_k + (1/2) sum_y (V_k(x,y) - V_k(y,x))
/// K(x,y), one row per interval.
Matrix continuity_residual(const ReversibleChain& chain, const DensityPath& path);

/// h_k (1/2) [A'(rho_k, V_k) + A'(rho_{k+1}, V_k)] summed over intervals.
double path_action(const ReversibleChain& chain, const DensityPath& path);

struct FlowOptions {
  std::size_t grid = 16;
  double tolerance = 1e-8;
  std::size_t max_iterations = 200;
  /// Densities below this value are mollified to keep the mobility positive.
  double epsilon = 1e-9;
};

struct FlowResult {
  double value = 0.0;   ///< discrete W
  double action = 0.0;  ///< discrete W^2
  DensityPath path;
  bool converged = false;
  bool mollified = false;
  std::size_t iterations = 0;
  double relative_change = 0.0;
  double residual = 0.0;  ///< max |continuity residual| times pi
};

/// Minimizes the grid action over discrete continuity-equation paths from
/// rho0 to rho1 (densities relative to pi with unit pi-mass) by a damped
/// Newton method in the null space of the constraints. Returns the best
/// feasible path; `converged` reports the stopping criterion.
FlowResult w_distance(const ReversibleChain& chain, const Vector& rho0,
                      const Vector& rho1, const FlowOptions& options = {});

/// H(rho) = sum rho log rho pi with 0 log 0 = 0.
double entropy_mm(const ReversibleChain& chain, const Vector& rho);

/// Throws GroupNotKernelPreserving unless every element keeps K and pi
/// within 1e-12.
void require_kernel_preserving(const ReversibleChain& chain,
                               const PermutationGroup& group);

struct AveragedPair {
  Vector rho;
  Matrix V;
};

/// rho^G(x) = (1/|G|) sum_g rho(gx), V^G(x,y) = (1/|G|) sum_g V(gx, gy).
AveragedPair g_average(const ReversibleChain& chain,
                       const PermutationGroup& group, const Vector& rho,
                       const Matrix& V);
DensityPath g_average(const ReversibleChain& chain,
                      const PermutationGroup& group, const DensityPath& path);

struct QuotientChainMM {
  ReversibleChain chain;
  std::vector<std::vector<Index>> orbits;
  std::vector<Index> proj;

  /// f^(x) = f(x*).
  Vector lift(const Vector& f) const;
};

/// K*(x*, y*) = sum_{y in y*} K(x, y) at any x in x*, pi* = fiber sums.
QuotientChainMM quotient_chain_mm(const ReversibleChain& chain,
                                  const PermutationGroup& group);

struct IsometryReport {
  double w_quotient = 0.0;
  double w_base = 0.0;
  double entropy_quotient = 0.0;
  double entropy_base = 0.0;
  std::vector<CheckResult> checks;
};

/// W* between quotient densities against W between their lifts, on the same
/// grid, with relative tolerance max(1e-3, 2 tol); entropy of the lift
/// against the quotient entropy within the summation rounding bound.
/// Throws NotConverged when either solve fails to converge.
IsometryReport verify_w_isometry(const ReversibleChain& chain,
                                 const PermutationGroup& group,
                                 const Vector& rho0, const Vector& rho1,
                                 const FlowOptions& options = {});

}  // namespace eqot
