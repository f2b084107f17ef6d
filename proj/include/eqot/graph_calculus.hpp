#pragma once

#include <string>
#include <vector>

#include "eqot/core_spaces.hpp"
#include "eqot/report.hpp"

namespace eqot {

/// Finite weighted graph with a vertex measure. x ~ y iff omega(x, y) > 0.
class WeightedGraph {
 public:
  /// omega must be symmetric, nonnegative, finite with zero diagonal; the
  /// measure strictly positive. Disconnected graphs are accepted.
  WeightedGraph(std::vector<std::string> labels, Matrix omega, Vector measure);
  WeightedGraph(Matrix omega, Vector measure);
  /// Measure defaults to the weighted degree; isolated vertices get mass 1.
  static WeightedGraph with_degree_measure(std::vector<std::string> labels,
                                           Matrix omega);

  Index size() const { return static_cast<Index>(measure_.size()); }
  double weight(Index x, Index y) const { return omega_(x, y); }
  double measure(Index x) const { return measure_(x); }
  const Matrix& omega() const { return omega_; }
  const Vector& measures() const { return measure_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Index>& neighbors(Index x) const { return neighbors_[x]; }
  double degree(Index x) const;
  bool connected() const { return connected_; }

 private:
  std::vector<std::string> labels_;
  Matrix omega_;
  Vector measure_;
  std::vector<std::vector<Index>> neighbors_;
  bool connected_ = true;
};

/// Delta f(x) = (1/m(x)) sum_y omega(x,y) (f(y) - f(x)).
Vector laplacian(const WeightedGraph& g, const Vector& f);
/// Gamma(f,h)(x) = (1/(2 m(x))) sum_y omega(x,y) (f(y)-f(x)) (h(y)-h(x)).
Vector gamma(const WeightedGraph& g, const Vector& f, const Vector& h);
/// Gamma_2(f,h) = (1/2) [Delta Gamma(f,h) - Gamma(f, Delta h) - Gamma(Delta f, h)].
Vector gamma2(const WeightedGraph& g, const Vector& f, const Vector& h);

/// Pointwise versions reading only the 2-ball of x.
double laplacian_at(const WeightedGraph& g, Index x, const Vector& f);
double gamma_at(const WeightedGraph& g, Index x, const Vector& f,
                const Vector& h);
double gamma2_at(const WeightedGraph& g, Index x, const Vector& f,
                 const Vector& h);

/// Vertices at combinatorial distance 1 and 2 from x, each sorted.
struct TwoBall {
  std::vector<Index> sphere1;
  std::vector<Index> sphere2;
};
TwoBall two_ball(const WeightedGraph& g, Index x);

/// Largest K with Gamma_2(f,f)(x) >= K Gamma(f,f)(x) + (Delta f(x))^2 / N
/// for all f. N must be >= 1 or +inf. Returns +inf at an isolated vertex
/// and -inf when the form is unbounded below on the kernel of Gamma (the
/// 2-sphere block fails positivity by more than 1e-9 or couples to the
/// neighbours along a null direction).
double cd_curvature(const WeightedGraph& g, Index x, double N);

/// cd_curvature at every vertex.
Vector cd_curvature_all(const WeightedGraph& g, double N);

struct CdeResult {
  bool holds = true;
  double slack = 0.0;  ///< lhs - rhs of the CDE inequality at x
};

/// Evaluates Gamma_2(f,f) - Gamma(f, Gamma(f,f)/f) >= K Gamma(f,f) +
/// (Delta f)^2/N at x for one positive f; holds iff slack >= -tol.
/// Throws NonpositiveFunction.
CdeResult cde_check(const WeightedGraph& g, Index x, double K, double N,
                    const Vector& f, double tol = 1e-12);

struct CdeSweep {
  double min_slack = 0.0;
  Index worst_vertex = 0;
  std::size_t worst_function = 0;
  bool holds = true;
};

/// Minimal CDE slack over every vertex and every supplied positive test
/// function. A verifier over the given family only.
CdeSweep cde_sweep(const WeightedGraph& g, double K, double N,
                   const std::vector<Vector>& family, double tol = 1e-12);

struct SobolevNorms {
  double lp_pow = 0.0;        ///< sum |f|^p m
  double gradient_pow = 0.0;  ///< sum_x |grad f|^p(x) m(x)
  double w1p_pow = 0.0;       ///< lp_pow + gradient_pow
};

/// p-th powers of the l^p, gradient and w^{1,p} norms with
/// |grad f|^p(x) = (1/(p m(x))) sum_y omega(x,y) |f(y) - f(x)|^p, p >= 1.
SobolevNorms sobolev_norms(const WeightedGraph& g, const Vector& f, double p);

struct QuotientGraph {
  WeightedGraph graph;
  std::vector<std::vector<Index>> orbits;
  std::vector<Index> proj;

  /// f^(x) = f(x*).
  Vector lift(const Vector& f) const;
};

/// Orbit graph with m* = fiber sums of m and omega* = fiber-by-fiber sums of
/// omega between distinct orbits; edges inside an orbit are dropped.
/// Throws ActionNotWeightPreserving / ActionNotMeasurePreserving.
QuotientGraph quotient_graph(const WeightedGraph& g,
                             const PermutationGroup& group);

/// Max deviations of Delta, Gamma and Gamma_2 between quotient and base at
/// every base point (absolute tolerance 1e-12), and of the l^p and Dirichlet
/// sums (summation rounding bound).
std::vector<CheckResult> verify_lift_commutation(const WeightedGraph& g,
                                                 const PermutationGroup& group,
                                                 const Vector& f_star,
                                                 const Vector& h_star,
                                                 double p = 2.0);

struct CdQuotientReport {
  double K = 0.0;
  double K_star = 0.0;
  CheckResult check;
};

/// K = min_x cd_curvature on the base, K* on the quotient graph, and the
/// check K* >= K - 1e-7.
CdQuotientReport verify_cd_quotient(const WeightedGraph& g,
                                    const PermutationGroup& group, double N);

}  // namespace eqot
