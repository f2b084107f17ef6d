#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "eqot/core_spaces.hpp"
#include "eqot/report.hpp"
#include "eqot/transport.hpp"

namespace eqot {

/// nu_x = (1/|G|) sum_g delta_{gx}: the unique G-invariant probability on the
/// orbit of x. One vector per base point.
class OrbitMeasureFamily {
 public:
  explicit OrbitMeasureFamily(const GroupAction& action);

  const Vector& nu(Index x) const { return nu_[x]; }
  Index size() const { return static_cast<Index>(nu_.size()); }

 private:
  std::vector<Vector> nu_;
};

/// Lambda(mu) = sum_{x*} mu(x*) nu_{x}: G-invariant, projects onto mu.
Measure lift_measure(const QuotientSpace& q, const Measure& mu);

/// p_# mu.
Measure push_forward(const QuotientSpace& q, const Measure& mu);

/// g_# mu for one group element.
Measure transform_measure(const PermutationGroup& group, std::size_t g,
                          const Measure& mu);

/// mu_G = (1/|G|) sum_g g_# mu.
Measure group_average(const PermutationGroup& group, const Measure& mu);

/// f^(x) = f(x*).
Vector lift_function(const QuotientSpace& q, const Vector& f);

/// Pairs (x, y) with d(x, y) == d*(x*, y*), lexicographically ordered.
std::vector<std::pair<Index, Index>> orbit_distance_set(const QuotientSpace& q);
bool in_orbit_distance_set(const QuotientSpace& q, Index x, Index y);

/// Chooses base representatives (x, y) for a pair of orbits.
using Section = std::function<std::pair<Index, Index>(Index, Index)>;

/// Lexicographically first pair of the orbit-distance set over (x*, y*).
std::pair<Index, Index> default_section(const QuotientSpace& q, Index xs,
                                        Index ys);

/// pi^ = sum pi(x*, y*) (1/|G|) sum_g delta_{(g x, g y)} with (x, y) chosen by
/// the section (default: lexicographically first). Throws SectionOutsideOD.
Coupling lift_coupling(const QuotientSpace& q, const Coupling& pi,
                       const Section& section = {});

/// Marginal identities, support inside the orbit-distance set, cost
/// equality with the quotient plan and optimality against an LP solve of
/// the lifted marginals.
std::vector<CheckResult> verify_lift_coupling(const QuotientSpace& q,
                                              const Coupling& pi,
                                              double tolerance = kSolverTolerance);

/// phi^(x) = phi(x*), psi^(y) = psi(y*). Throws InfeasibleInput if the pair
/// violates phi + psi <= d*^p on the quotient by more than 1e-9.
PotentialPair lift_potentials(const QuotientSpace& q, const PotentialPair& pair,
                              double p);

/// Ent(mu) = sum rho log rho m with rho = mu / m and 0 log 0 = 0.
double entropy(const FiniteMetricMeasureSpace& ref, const Measure& mu);

/// sum over supp(mu) of rho^(1 - 1/N') m; N' may be +inf (exponent 1).
double renyi_functional(const FiniteMetricMeasureSpace& ref, const Measure& mu,
                        double n_prime);

struct DistortionParams {
  double K = 0.0;
  double N = std::numeric_limits<double>::infinity();
  double t = 0.0;
  double theta = 0.0;
};

/// sigma^{(t)}_{K,N}(theta). Branch order: K theta^2 == 0 gives t; then
/// K theta^2 >= N pi^2 gives +inf; then the sin quotient; for
/// K theta^2 < 0 it is t when N == 0 and the sinh quotient otherwise.
/// N == +inf gives t.
double sigma_coefficient(const DistortionParams& par);

/// tau^{(t)}_{K,N}(theta) = t^{1/N} sigma^{(t)}_{K,N-1}(theta)^{(N-1)/N} for
/// N > 1. N == 1 gives +inf when K > 0 and theta > 0, t otherwise; N == +inf
/// gives t.
double tau_coefficient(const DistortionParams& par);

struct CdRhsReport {
  double base_integral = 0.0;
  double quotient_integral = 0.0;
  double difference = 0.0;
  double tolerance = kSolverTolerance;
  bool pass = true;

  CheckResult check() const;
};

/// Evaluates
///   sum [tau^{(1-t)}(d) rho0(x)^{-1/N'} + tau^{(t)}(d) rho1(y)^{-1/N'}] dpi
/// on the quotient with d* and, independently, on the base with the lifted
/// coupling, lifted densities and d. Densities are relative to the reference
/// masses; pi must be W2-optimal between them (throws CouplingNotOptimal).
CdRhsReport verify_cd_rhs_equality(const QuotientSpace& q, const Vector& rho0,
                                   const Vector& rho1, const Coupling& pi,
                                   double K, double n_prime, double t,
                                   double tolerance = kSolverTolerance);

}  // namespace eqot
