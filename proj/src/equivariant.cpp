#include "eqot/equivariant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "eqot/error.hpp"

namespace eqot {

OrbitMeasureFamily::OrbitMeasureFamily(const GroupAction& action) {
  const auto& group = action.group();
  const Index n = action.base().size();
  const double w = 1.0 / static_cast<double>(group.order());
  nu_.assign(n, Vector::Zero(n));
  for (Index x = 0; x < n; ++x)
    for (std::size_t g = 0; g < group.order(); ++g) nu_[x](group.apply(g, x)) += w;
}

Measure lift_measure(const QuotientSpace& q, const Measure& mu) {
  if (mu.size() != q.size())
    throw Error(ErrorCode::DimensionMismatch,
                "measure does not live on the quotient");
  const auto& group = q.action().group();
  const double w = 1.0 / static_cast<double>(group.order());
  Vector lifted = Vector::Zero(q.base().size());
  for (Index a = 0; a < q.size(); ++a) {
    if (mu(a) == 0.0) continue;
    const Index rep = q.representative(a);
    for (std::size_t g = 0; g < group.order(); ++g)
      lifted(group.apply(g, rep)) += mu(a) * w;
  }
  return Measure::normalized(lifted);
}

Measure push_forward(const QuotientSpace& q, const Measure& mu) {
  if (mu.size() != q.base().size())
    throw Error(ErrorCode::DimensionMismatch,
                "measure does not live on the base space");
  Vector pushed = Vector::Zero(q.size());
  for (Index x = 0; x < mu.size(); ++x) pushed(q.proj(x)) += mu(x);
  return Measure::normalized(pushed);
}

Measure transform_measure(const PermutationGroup& group, std::size_t g,
                          const Measure& mu) {
  Vector moved = Vector::Zero(mu.size());
  for (Index x = 0; x < mu.size(); ++x) moved(group.apply(g, x)) = mu(x);
  return Measure(std::move(moved));
}

Measure group_average(const PermutationGroup& group, const Measure& mu) {
  Vector avg = Vector::Zero(mu.size());
  const double w = 1.0 / static_cast<double>(group.order());
  for (std::size_t g = 0; g < group.order(); ++g)
    for (Index x = 0; x < mu.size(); ++x) avg(group.apply(g, x)) += w * mu(x);
  return Measure::normalized(avg);
}

Vector lift_function(const QuotientSpace& q, const Vector& f) {
  if (static_cast<Index>(f.size()) != q.size())
    throw Error(ErrorCode::DimensionMismatch,
                "function does not live on the quotient");
  Vector out(q.base().size());
  for (Index x = 0; x < q.base().size(); ++x) out(x) = f(q.proj(x));
  return out;
}

bool in_orbit_distance_set(const QuotientSpace& q, Index x, Index y) {
  return q.base().dist(x, y) == q.qspace().dist(q.proj(x), q.proj(y));
}

std::vector<std::pair<Index, Index>> orbit_distance_set(const QuotientSpace& q) {
  std::vector<std::pair<Index, Index>> out;
  const Index n = q.base().size();
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (in_orbit_distance_set(q, x, y)) out.emplace_back(x, y);
  return out;
}

std::pair<Index, Index> default_section(const QuotientSpace& q, Index xs,
                                        Index ys) {
  for (Index x : q.orbit(xs))
    for (Index y : q.orbit(ys))
      if (in_orbit_distance_set(q, x, y)) return {x, y};
  throw Error(ErrorCode::NoODRepresentative,
              "no pair realizes the orbit distance");
}

Coupling lift_coupling(const QuotientSpace& q, const Coupling& pi,
                       const Section& section) {
  const Index k = q.size();
  if (static_cast<Index>(pi.plan.rows()) != k ||
      static_cast<Index>(pi.plan.cols()) != k)
    throw Error(ErrorCode::DimensionMismatch,
                "coupling does not live on the quotient");
  const auto& group = q.action().group();
  const double w = 1.0 / static_cast<double>(group.order());
  const Index n = q.base().size();
  Matrix lifted = Matrix::Zero(n, n);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) {
      const double mass = pi.plan(a, b);
      if (mass <= 0.0) continue;
      const auto [x, y] = section ? section(a, b) : default_section(q, a, b);
      if (x >= n || y >= n || q.proj(x) != a || q.proj(y) != b ||
          !in_orbit_distance_set(q, x, y))
        throw Error(ErrorCode::SectionOutsideOD,
                    "section pair (" + std::to_string(x) + "," +
                        std::to_string(y) + ") does not realize d*");
      for (std::size_t g = 0; g < group.order(); ++g)
        lifted(group.apply(g, x), group.apply(g, y)) += mass * w;
    }
  return Coupling{std::move(lifted), pi.p};
}

std::vector<CheckResult> verify_lift_coupling(const QuotientSpace& q,
                                              const Coupling& pi,
                                              double tolerance) {
  const double p = pi.p;
  const Coupling lifted = lift_coupling(q, pi);
  const Measure mu0 = Measure::normalized(pi.first_marginal());
  const Measure mu1 = Measure::normalized(pi.second_marginal());
  const Measure hat0 = lift_measure(q, mu0);
  const Measure hat1 = lift_measure(q, mu1);

  std::vector<CheckResult> checks;
  checks.push_back(CheckResult::equal(
      "lift_coupling.first_marginal",
      (lifted.first_marginal() - hat0.weights()).cwiseAbs().maxCoeff(), 0.0,
      1e-12));
  checks.push_back(CheckResult::equal(
      "lift_coupling.second_marginal",
      (lifted.second_marginal() - hat1.weights()).cwiseAbs().maxCoeff(), 0.0,
      1e-12));
  bool inside = true;
  for (const auto& [x, y] : lifted.support())
    inside = inside && in_orbit_distance_set(q, x, y);
  checks.push_back(CheckResult::holds("lift_coupling.support_in_OD", inside));

  const double base_cost = lifted.cost(cost_table(q.base(), p));
  const double quotient_cost = pi.cost(cost_table(q.qspace(), p));
  checks.push_back(CheckResult::equal("lift_coupling.cost_equality", base_cost,
                                      quotient_cost,
                                      1e-12 * std::max(1.0, quotient_cost)));
  const double quotient_opt = wasserstein(q.qspace(), mu0, mu1, p).cost;
  const bool optimal_input = quotient_cost <= quotient_opt + tolerance;
  if (optimal_input) {
    const double base_opt = wasserstein(q.base(), hat0, hat1, p).cost;
    checks.push_back(CheckResult::equal("lift_coupling.optimality", base_cost,
                                        base_opt, tolerance));
  }
  return checks;
}

PotentialPair lift_potentials(const QuotientSpace& q, const PotentialPair& pair,
                              double p) {
  const Matrix qcost = cost_table(q.qspace(), p);
  if (static_cast<Index>(pair.phi.size()) != q.size() ||
      static_cast<Index>(pair.psi.size()) != q.size())
    throw Error(ErrorCode::DimensionMismatch,
                "potentials do not live on the quotient");
  if (pair.max_violation(qcost) > kSolverTolerance)
    throw Error(ErrorCode::InfeasibleInput,
                "potentials violate phi + psi <= d*^p");
  return PotentialPair{lift_function(q, pair.phi), lift_function(q, pair.psi)};
}

// ---------------------------------------------------------------------------
// Entropy-type functionals

double entropy(const FiniteMetricMeasureSpace& ref, const Measure& mu) {
  if (mu.size() != ref.size())
    throw Error(ErrorCode::DimensionMismatch, "measure/space size mismatch");
  double total = 0.0;
  for (Index x = 0; x < ref.size(); ++x) {
    if (mu(x) == 0.0) continue;
    const double rho = mu(x) / ref.mass(x);
    total += rho * std::log(rho) * ref.mass(x);
  }
  return total;
}

double renyi_functional(const FiniteMetricMeasureSpace& ref, const Measure& mu,
                        double n_prime) {
  if (mu.size() != ref.size())
    throw Error(ErrorCode::DimensionMismatch, "measure/space size mismatch");
  if (!(n_prime >= 1.0))
    throw Error(ErrorCode::Validation, "N' must be at least 1");
  const double exponent = std::isinf(n_prime) ? 1.0 : 1.0 - 1.0 / n_prime;
  double total = 0.0;
  for (Index x = 0; x < ref.size(); ++x) {
    if (mu(x) == 0.0) continue;
    const double rho = mu(x) / ref.mass(x);
    total += std::pow(rho, exponent) * ref.mass(x);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Distortion coefficients

namespace {

void require_t_theta(const DistortionParams& par) {
  if (!(par.t >= 0.0 && par.t <= 1.0))
    throw Error(ErrorCode::Validation, "t must lie in [0, 1]");
  if (!(par.theta >= 0.0))
    throw Error(ErrorCode::Validation, "theta must be nonnegative");
}

}  // namespace

double sigma_coefficient(const DistortionParams& par) {
  require_t_theta(par);
  if (!(par.N >= 0.0))
    throw Error(ErrorCode::Validation, "N must be nonnegative");
  const double t = par.t, theta = par.theta, K = par.K, N = par.N;
  const double k_theta2 = K * theta * theta;
  if (std::isinf(N) || k_theta2 == 0.0) return t;
  if (k_theta2 >= N * std::numbers::pi * std::numbers::pi)
    return std::numeric_limits<double>::infinity();
  if (k_theta2 > 0.0) {
    const double s = theta * std::sqrt(K / N);
    return std::sin(t * s) / std::sin(s);
  }
  if (N == 0.0) return t;
  const double s = theta * std::sqrt(-K / N);
  return std::sinh(t * s) / std::sinh(s);
}

double tau_coefficient(const DistortionParams& par) {
  require_t_theta(par);
  if (!(par.N >= 1.0))
    throw Error(ErrorCode::Validation, "tau needs N >= 1");
  if (std::isinf(par.N)) return par.t;
  if (par.N == 1.0)
    return (par.K > 0.0 && par.theta > 0.0)
               ? std::numeric_limits<double>::infinity()
               : par.t;
  DistortionParams lowered = par;
  lowered.N = par.N - 1.0;
  const double sigma = sigma_coefficient(lowered);
  if (std::isinf(sigma)) return sigma;
  return std::pow(par.t, 1.0 / par.N) *
         std::pow(sigma, (par.N - 1.0) / par.N);
}

// ---------------------------------------------------------------------------
// CD right-hand side transfer

CheckResult CdRhsReport::check() const {
  return CheckResult::equal("cd_rhs_equality", base_integral,
                            quotient_integral, tolerance);
}

namespace {

double rhs_integrand(double d, double rho0_x, double rho1_y, double K,
                     double n_prime, double t) {
  const double e = std::isinf(n_prime) ? 0.0 : -1.0 / n_prime;
  const double tau0 = tau_coefficient({K, n_prime, 1.0 - t, d});
  const double tau1 = tau_coefficient({K, n_prime, t, d});
  return tau0 * std::pow(rho0_x, e) + tau1 * std::pow(rho1_y, e);
}

}  // namespace

CdRhsReport verify_cd_rhs_equality(const QuotientSpace& q, const Vector& rho0,
                                   const Vector& rho1, const Coupling& pi,
                                   double K, double n_prime, double t,
                                   double tolerance) {
  const auto& qs = q.qspace();
  const auto& base = q.base();
  if (static_cast<Index>(rho0.size()) != qs.size() ||
      static_cast<Index>(rho1.size()) != qs.size())
    throw Error(ErrorCode::DimensionMismatch,
                "densities must live on the quotient");
  const Measure mu0(rho0.cwiseProduct(qs.masses()));
  const Measure mu1(rho1.cwiseProduct(qs.masses()));
  if (pi.marginal_residual(mu0, mu1) > 1e-10)
    throw Error(ErrorCode::CouplingNotOptimal,
                "coupling marginals do not match the densities");
  const double optimum = wasserstein(qs, mu0, mu1, 2.0).cost;
  if (pi.cost(cost_table(qs, 2.0)) > optimum + kSolverTolerance)
    throw Error(ErrorCode::CouplingNotOptimal,
                "coupling cost exceeds the W2 optimum");

  CdRhsReport report;
  report.tolerance = tolerance;
  for (Index a = 0; a < qs.size(); ++a)
    for (Index b = 0; b < qs.size(); ++b)
      if (pi.plan(a, b) > 0.0)
        report.quotient_integral +=
            pi.plan(a, b) *
            rhs_integrand(qs.dist(a, b), rho0(a), rho1(b), K, n_prime, t);

  // Base side from the lifted measures, not from lifting rho directly.
  const Coupling lifted = lift_coupling(q, Coupling{pi.plan, 2.0});
  const Vector hat_rho0 = lift_measure(q, mu0).density(base);
  const Vector hat_rho1 = lift_measure(q, mu1).density(base);
  for (Index x = 0; x < base.size(); ++x)
    for (Index y = 0; y < base.size(); ++y)
      if (lifted.plan(x, y) > 0.0)
        report.base_integral +=
            lifted.plan(x, y) * rhs_integrand(base.dist(x, y), hat_rho0(x),
                                              hat_rho1(y), K, n_prime, t);

  report.difference = std::abs(report.base_integral - report.quotient_integral);
  if (std::isinf(report.base_integral) &&
      report.base_integral == report.quotient_integral)
    report.difference = 0.0;
  report.pass = report.difference <= tolerance;
  return report;
}

}  // namespace eqot
