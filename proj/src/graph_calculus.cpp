#include "eqot/graph_calculus.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "eqot/error.hpp"

namespace eqot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inverse_n(double N) {
  if (!(N >= 1.0))
    throw Error(ErrorCode::Validation, "N must be >= 1 or +inf");
  return std::isinf(N) ? 0.0 : 1.0 / N;
}

void require_size(const WeightedGraph& g, const Vector& f) {
  if (static_cast<Index>(f.size()) != g.size())
    throw Error(ErrorCode::DimensionMismatch,
                "function has " + std::to_string(f.size()) +
                    " entries, graph has " + std::to_string(g.size()) +
                    " vertices");
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightedGraph

WeightedGraph::WeightedGraph(std::vector<std::string> labels, Matrix omega,
                             Vector measure)
    : labels_(std::move(labels)),
      omega_(std::move(omega)),
      measure_(std::move(measure)) {
  const Index n = static_cast<Index>(measure_.size());
  if (n == 0) throw Error(ErrorCode::Validation, "graph has no vertices");
  if (static_cast<Index>(omega_.rows()) != n ||
      static_cast<Index>(omega_.cols()) != n || labels_.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "weights, measure and labels disagree on the vertex count");
  neighbors_.resize(n);
  for (Index x = 0; x < n; ++x) {
    if (!std::isfinite(measure_(x)) || !(measure_(x) > 0.0))
      throw Error(ErrorCode::Validation,
                  "measure at vertex " + labels_[x] + " must be positive");
    if (omega_(x, x) != 0.0)
      throw Error(ErrorCode::Validation,
                  "self-loop weight at vertex " + labels_[x]);
    for (Index y = 0; y < n; ++y) {
      const double w = omega_(x, y);
      if (!std::isfinite(w) || w < 0.0)
        throw Error(ErrorCode::Validation,
                    "weight (" + labels_[x] + "," + labels_[y] +
                        ") must be finite and nonnegative");
      if (w != omega_(y, x))
        throw Error(ErrorCode::Validation,
                    "weights are not symmetric at (" + labels_[x] + "," +
                        labels_[y] + ")");
      if (w > 0.0) neighbors_[x].push_back(y);
    }
  }
  std::vector<bool> seen(n, false);
  std::deque<Index> queue{0};
  seen[0] = true;
  Index reached = 1;
  while (!queue.empty()) {
    const Index x = queue.front();
    queue.pop_front();
    for (Index y : neighbors_[x])
      if (!seen[y]) {
        seen[y] = true;
        ++reached;
        queue.push_back(y);
      }
  }
  connected_ = reached == n;
}

namespace {

std::vector<std::string> default_labels(Index n) {
  std::vector<std::string> labels;
  for (Index i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return labels;
}

}  // namespace

WeightedGraph::WeightedGraph(Matrix omega, Vector measure)
    : WeightedGraph(default_labels(static_cast<Index>(measure.size())), omega,
                    measure) {}

WeightedGraph WeightedGraph::with_degree_measure(std::vector<std::string> labels,
                                                 Matrix omega) {
  Vector m = omega.rowwise().sum();
  for (Index x = 0; x < static_cast<Index>(m.size()); ++x)
    if (m(x) == 0.0) m(x) = 1.0;
  return WeightedGraph(std::move(labels), std::move(omega), std::move(m));
}

double WeightedGraph::degree(Index x) const {
  double d = 0.0;
  for (Index y : neighbors_[x]) d += omega_(x, y);
  return d;
}

// ---------------------------------------------------------------------------
// Operators

double laplacian_at(const WeightedGraph& g, Index x, const Vector& f) {
  double s = 0.0;
  for (Index y : g.neighbors(x)) s += g.weight(x, y) * (f(y) - f(x));
  return s / g.measure(x);
}

double gamma_at(const WeightedGraph& g, Index x, const Vector& f,
                const Vector& h) {
  double s = 0.0;
  for (Index y : g.neighbors(x))
    s += g.weight(x, y) * (f(y) - f(x)) * (h(y) - h(x));
  return s / (2.0 * g.measure(x));
}

double gamma2_at(const WeightedGraph& g, Index x, const Vector& f,
                 const Vector& h) {
  const double gx = gamma_at(g, x, f, h);
  const double lf_x = laplacian_at(g, x, f);
  const double lh_x = laplacian_at(g, x, h);
  double lap_gamma = 0.0, cross_f = 0.0, cross_h = 0.0;
  for (Index y : g.neighbors(x)) {
    const double w = g.weight(x, y);
    lap_gamma += w * (gamma_at(g, y, f, h) - gx);
    cross_f += w * (f(y) - f(x)) * (laplacian_at(g, y, h) - lh_x);
    cross_h += w * (laplacian_at(g, y, f) - lf_x) * (h(y) - h(x));
  }
  const double m = g.measure(x);
  return 0.5 * (lap_gamma / m - cross_f / (2.0 * m) - cross_h / (2.0 * m));
}

Vector laplacian(const WeightedGraph& g, const Vector& f) {
  require_size(g, f);
  Vector out(g.size());
  for (Index x = 0; x < g.size(); ++x) out(x) = laplacian_at(g, x, f);
  return out;
}

Vector gamma(const WeightedGraph& g, const Vector& f, const Vector& h) {
  require_size(g, f);
  require_size(g, h);
  Vector out(g.size());
  for (Index x = 0; x < g.size(); ++x) out(x) = gamma_at(g, x, f, h);
  return out;
}

Vector gamma2(const WeightedGraph& g, const Vector& f, const Vector& h) {
  const Vector lap_gamma = laplacian(g, gamma(g, f, h));
  const Vector a = gamma(g, f, laplacian(g, h));
  const Vector b = gamma(g, laplacian(g, f), h);
  return 0.5 * (lap_gamma - a - b);
}

// ---------------------------------------------------------------------------
// CD curvature

TwoBall two_ball(const WeightedGraph& g, Index x) {
  TwoBall ball;
  ball.sphere1 = g.neighbors(x);
  std::vector<bool> inside(g.size(), false);
  inside[x] = true;
  for (Index y : ball.sphere1) inside[y] = true;
  for (Index y : ball.sphere1)
    for (Index z : g.neighbors(y))
      if (!inside[z]) {
        inside[z] = true;
        ball.sphere2.push_back(z);
      }
  std::sort(ball.sphere2.begin(), ball.sphere2.end());
  return ball;
}

double cd_curvature(const WeightedGraph& g, Index x, double N) {
  const double inv_n = inverse_n(N);
  const TwoBall ball = two_ball(g, x);
  const Index n1 = ball.sphere1.size(), n2 = ball.sphere2.size();
  if (n1 == 0) return kInf;

  // Variables: f on S1 then S2, with f(x) = 0.
  std::vector<Index> vars = ball.sphere1;
  vars.insert(vars.end(), ball.sphere2.begin(), ball.sphere2.end());
  const Index L = vars.size();
  std::vector<Vector> basis(L, Vector::Zero(g.size()));
  for (Index i = 0; i < L; ++i) basis[i](vars[i]) = 1.0;

  Matrix A(L, L);
  for (Index i = 0; i < L; ++i)
    for (Index j = i; j < L; ++j)
      A(i, j) = A(j, i) = gamma2_at(g, x, basis[i], basis[j]);
  Vector ell = Vector::Zero(L);
  Vector b(n1);
  for (Index i = 0; i < n1; ++i) {
    ell(i) = g.weight(x, vars[i]) / g.measure(x);
    b(i) = g.weight(x, vars[i]) / (2.0 * g.measure(x));
  }
  A -= inv_n * ell * ell.transpose();

  Matrix S = A.topLeftCorner(n1, n1);
  if (n2 > 0) {
    const Matrix A12 = A.topRightCorner(n1, n2);
    const Matrix A22 = A.bottomRightCorner(n2, n2);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(A22);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const double null_tol = 1e-12 * scale * static_cast<double>(L);
    if (eig.eigenvalues()(0) < -1e-9) return -kInf;
    Matrix correction = Matrix::Zero(n1, n1);
    for (Index k = 0; k < n2; ++k) {
      const double lambda = eig.eigenvalues()(k);
      const Vector coupling = A12 * eig.eigenvectors().col(k);
      if (lambda <= null_tol) {
        if (coupling.cwiseAbs().maxCoeff() > 1e-9) return -kInf;
        continue;
      }
      correction += coupling * coupling.transpose() / lambda;
    }
    S -= correction;
  }
  Vector inv_sqrt_b = b.cwiseSqrt().cwiseInverse();
  Matrix M = inv_sqrt_b.asDiagonal() * S * inv_sqrt_b.asDiagonal();
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

Vector cd_curvature_all(const WeightedGraph& g, double N) {
  Vector out(g.size());
  for (Index x = 0; x < g.size(); ++x) out(x) = cd_curvature(g, x, N);
  return out;
}

// ---------------------------------------------------------------------------
// CDE

CdeResult cde_check(const WeightedGraph& g, Index x, double K, double N,
                    const Vector& f, double tol) {
  require_size(g, f);
  const double inv_n = inverse_n(N);
  for (Index y = 0; y < g.size(); ++y)
    if (!(f(y) > 0.0))
      throw Error(ErrorCode::NonpositiveFunction,
                  "test function must be positive at vertex " + g.labels()[y]);
  const Vector gff = gamma(g, f, f);
  const Vector ratio = gff.cwiseQuotient(f);
  const double lap = laplacian_at(g, x, f);
  const double lhs = gamma2_at(g, x, f, f) - gamma_at(g, x, f, ratio);
  const double rhs = K * gff(x) + inv_n * lap * lap;
  CdeResult out;
  out.slack = lhs - rhs;
  out.holds = out.slack >= -tol;
  return out;
}

CdeSweep cde_sweep(const WeightedGraph& g, double K, double N,
                   const std::vector<Vector>& family, double tol) {
  CdeSweep sweep;
  sweep.min_slack = kInf;
  for (std::size_t i = 0; i < family.size(); ++i)
    for (Index x = 0; x < g.size(); ++x) {
      const CdeResult r = cde_check(g, x, K, N, family[i], tol);
      if (r.slack < sweep.min_slack) {
        sweep.min_slack = r.slack;
        sweep.worst_vertex = x;
        sweep.worst_function = i;
      }
    }
  sweep.holds = sweep.min_slack >= -tol;
  return sweep;
}

// ---------------------------------------------------------------------------
// Sobolev norms

SobolevNorms sobolev_norms(const WeightedGraph& g, const Vector& f, double p) {
  require_size(g, f);
  if (!(p >= 1.0) || !std::isfinite(p))
    throw Error(ErrorCode::Validation, "p must lie in [1, inf)");
  SobolevNorms out;
  for (Index x = 0; x < g.size(); ++x) {
    out.lp_pow += std::pow(std::abs(f(x)), p) * g.measure(x);
    double s = 0.0;
    for (Index y : g.neighbors(x))
      s += g.weight(x, y) * std::pow(std::abs(f(y) - f(x)), p);
    out.gradient_pow += s / p;
  }
  out.w1p_pow = out.lp_pow + out.gradient_pow;
  return out;
}

// ---------------------------------------------------------------------------
// Quotient graphs

Vector QuotientGraph::lift(const Vector& f) const {
  if (static_cast<Index>(f.size()) != orbits.size())
    throw Error(ErrorCode::DimensionMismatch,
                "function does not live on the quotient graph");
  Vector out(proj.size());
  for (Index x = 0; x < proj.size(); ++x) out(x) = f(proj[x]);
  return out;
}

QuotientGraph quotient_graph(const WeightedGraph& g,
                             const PermutationGroup& group) {
  const Index n = g.size();
  if (group.degree() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "group degree does not match the vertex count");
  const auto& checked =
      group.generators().empty() ? group.elements() : group.generators();
  const double wscale = std::max(1.0, g.omega().cwiseAbs().maxCoeff());
  for (const Permutation& perm : checked)
    for (Index x = 0; x < n; ++x) {
      if (std::abs(g.measure(perm[x]) - g.measure(x)) >
          1e-12 * std::max(1.0, g.measure(x)))
        throw Error(ErrorCode::ActionNotMeasurePreserving,
                    "group element moves mass at vertex " + g.labels()[x]);
      for (Index y = 0; y < n; ++y)
        if (std::abs(g.weight(perm[x], perm[y]) - g.weight(x, y)) >
            1e-12 * wscale)
          throw Error(ErrorCode::ActionNotWeightPreserving,
                      "group element changes weight (" + g.labels()[x] + "," +
                          g.labels()[y] + ")");
    }

  auto orbits = group.orbits();
  const Index k = orbits.size();
  std::vector<Index> proj(n);
  for (Index a = 0; a < k; ++a)
    for (Index x : orbits[a]) proj[x] = a;

  Matrix omega = Matrix::Zero(k, k);
  Vector m = Vector::Zero(k);
  std::vector<std::string> labels(k);
  for (Index a = 0; a < k; ++a) {
    std::string label = "{";
    for (std::size_t i = 0; i < orbits[a].size(); ++i) {
      if (i > 0) label += ",";
      label += g.labels()[orbits[a][i]];
      m(a) += g.measure(orbits[a][i]);
    }
    labels[a] = label + "}";
  }
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b) {
      double w = 0.0;
      for (Index x : orbits[a])
        for (Index y : orbits[b]) w += g.weight(x, y);
      omega(a, b) = omega(b, a) = w;
    }
  return QuotientGraph{WeightedGraph(std::move(labels), std::move(omega), m),
                       std::move(orbits), std::move(proj)};
}

std::vector<CheckResult> verify_lift_commutation(const WeightedGraph& g,
                                                 const PermutationGroup& group,
                                                 const Vector& f_star,
                                                 const Vector& h_star,
                                                 double p) {
  const QuotientGraph q = quotient_graph(g, group);
  const Vector f = q.lift(f_star), h = q.lift(h_star);
  if (static_cast<Index>(h_star.size()) != q.orbits.size())
    throw Error(ErrorCode::DimensionMismatch,
                "function does not live on the quotient graph");

  auto pointwise = [&](const std::string& name, const Vector& quot,
                       const Vector& base) {
    const double dev = (q.lift(quot) - base).cwiseAbs().maxCoeff();
    return CheckResult::equal(name, dev, 0.0, 1e-12);
  };
  std::vector<CheckResult> out;
  out.push_back(pointwise("lift.laplacian", laplacian(q.graph, f_star),
                          laplacian(g, f)));
  out.push_back(pointwise("lift.gamma", gamma(q.graph, f_star, h_star),
                          gamma(g, f, h)));
  out.push_back(pointwise("lift.gamma2", gamma2(q.graph, f_star, h_star),
                          gamma2(g, f, h)));

  const SobolevNorms base = sobolev_norms(g, f, p);
  const SobolevNorms quot = sobolev_norms(q.graph, f_star, p);
  const std::size_t n = g.size();
  // Each term carries a few roundings of its own besides the summation.
  const double lp_tol = summation_bound(n + 8, base.lp_pow) +
                        summation_bound(n + 8, quot.lp_pow);
  const double grad_tol = summation_bound(n * n + 8, base.gradient_pow) +
                          summation_bound(n * n + 8, quot.gradient_pow);
  out.push_back(
      CheckResult::equal("lift.lp_norm", quot.lp_pow, base.lp_pow, lp_tol));
  out.push_back(CheckResult::equal("lift.dirichlet", quot.gradient_pow,
                                   base.gradient_pow, grad_tol));
  return out;
}

CdQuotientReport verify_cd_quotient(const WeightedGraph& g,
                                    const PermutationGroup& group, double N) {
  const QuotientGraph q = quotient_graph(g, group);
  CdQuotientReport out;
  out.K = cd_curvature_all(g, N).minCoeff();
  out.K_star = cd_curvature_all(q.graph, N).minCoeff();
  out.check = CheckResult::at_least("cd.k_star_ge_k", out.K_star, out.K, 1e-7);
  return out;
}

}  // namespace eqot
