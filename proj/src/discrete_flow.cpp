#include "eqot/discrete_flow.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "eqot/error.hpp"

namespace eqot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool strongly_connected(const Matrix& k) {
  const Index n = static_cast<Index>(k.rows());
  auto reach_all = [&](bool transpose) {
    std::vector<bool> seen(n, false);
    std::deque<Index> queue{0};
    seen[0] = true;
    Index count = 1;
    while (!queue.empty()) {
      const Index x = queue.front();
      queue.pop_front();
      for (Index y = 0; y < n; ++y) {
        const double w = transpose ? k(y, x) : k(x, y);
        if (w > 0.0 && !seen[y]) {
          seen[y] = true;
          ++count;
          queue.push_back(y);
        }
      }
    }
    return count == n;
  };
  return reach_all(false) && reach_all(true);
}

}  // namespace

// ---------------------------------------------------------------------------
// ReversibleChain

ReversibleChain::ReversibleChain(Matrix kernel, std::optional<Vector> stationary)
    : kernel_(std::move(kernel)) {
  const Index n = static_cast<Index>(kernel_.rows());
  if (n == 0 || static_cast<Index>(kernel_.cols()) != n)
    throw Error(ErrorCode::DimensionMismatch, "kernel must be square and nonempty");
  for (Index x = 0; x < n; ++x) {
    double total = 0.0;
    for (Index y = 0; y < n; ++y) {
      if (!std::isfinite(kernel_(x, y)) || kernel_(x, y) < 0.0)
        throw Error(ErrorCode::Validation,
                    "kernel entry (" + std::to_string(x) + "," +
                        std::to_string(y) + ") must be finite and nonnegative");
      total += kernel_(x, y);
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw Error(ErrorCode::Validation,
                  "kernel row " + std::to_string(x) + " does not sum to 1");
  }
  if (!strongly_connected(kernel_))
    throw Error(ErrorCode::Validation, "kernel is not irreducible");

  if (stationary) {
    pi_ = std::move(*stationary);
    if (static_cast<Index>(pi_.size()) != n)
      throw Error(ErrorCode::DimensionMismatch,
                  "stationary distribution has the wrong length");
  } else {
    Matrix system(n + 1, n);
    system.topRows(n) = kernel_.transpose() - Matrix::Identity(n, n);
    system.row(n).setOnes();
    Vector rhs = Vector::Zero(n + 1);
    rhs(n) = 1.0;
    pi_ = system.colPivHouseholderQr().solve(rhs);
  }
  for (Index x = 0; x < n; ++x)
    if (!std::isfinite(pi_(x)) || !(pi_(x) > 0.0))
      throw Error(ErrorCode::Validation,
                  "stationary distribution must be positive");
  if (std::abs(pi_.sum() - 1.0) > 1e-10)
    throw Error(ErrorCode::Validation, "stationary distribution must sum to 1");
  const Vector drift = kernel_.transpose() * pi_ - pi_;
  if (drift.cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorCode::Validation, "pi K != pi");
  for (Index x = 0; x < n; ++x)
    for (Index y = x + 1; y < n; ++y)
      if (std::abs(kernel_(x, y) * pi_(x) - kernel_(y, x) * pi_(y)) > 1e-10)
        throw Error(ErrorCode::Validation,
                    "detailed balance fails at (" + std::to_string(x) + "," +
                        std::to_string(y) + ")");
}

// ---------------------------------------------------------------------------
// theta and alpha

double theta(double s, double t) {
  if (!(s >= 0.0) || !(t >= 0.0))
    throw Error(ErrorCode::NegativeInput, "theta needs nonnegative arguments");
  if (s == 0.0 || t == 0.0) return 0.0;
  if (s == t) return s;
  // Within a factor of 2, s - t is exact and log1p keeps L relatively
  // accurate as s -> t.
  const double L = (0.5 * t <= s && s <= 2.0 * t) ? std::log1p((s - t) / t)
                                                  : std::log(s) - std::log(t);
  if (std::abs(L) < 1e-5) {
    const double u2 = 0.25 * L * L;
    return std::sqrt(s) * std::sqrt(t) * (1.0 + u2 / 6.0 + u2 * u2 / 120.0);
  }
  return (s - t) / L;
}

namespace {

// 20-point Gauss-Legendre rule on [0, 1].
struct GaussLegendre {
  static constexpr int kPoints = 20;
  std::array<double, kPoints> nodes{};
  std::array<double, kPoints> weights{};

  GaussLegendre() {
    Matrix jacobi = Matrix::Zero(kPoints, kPoints);
    for (int k = 1; k < kPoints; ++k) {
      const double beta = k / std::sqrt(4.0 * k * k - 1.0);
      jacobi(k, k - 1) = jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
    for (int i = 0; i < kPoints; ++i) {
      nodes[i] = 0.5 * (eig.eigenvalues()(i) + 1.0);
      const double v = eig.eigenvectors()(0, i);
      weights[i] = v * v;
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule;
  return rule;
}

}  // namespace

ThetaDerivatives theta_derivatives(double s, double t) {
  if (!(s > 0.0) || !(t > 0.0))
    throw Error(ErrorCode::NegativeInput,
                "theta derivatives need positive arguments");
  ThetaDerivatives d{};
  d.value = theta(s, t);
  const double L = std::log(s) - std::log(t);
  if (std::abs(L) < 1.0) {
    // theta = int_0^1 s^p t^(1-p) dp = t int e^(pL) dp.
    double i1 = 0.0, i2 = 0.0, i3 = 0.0;
    const auto& rule = gauss_legendre();
    for (int k = 0; k < GaussLegendre::kPoints; ++k) {
      const double p = rule.nodes[k];
      const double w = rule.weights[k] * std::exp(p * L);
      i1 += w * p;
      i2 += w * (1.0 - p);
      i3 += w * p * (1.0 - p);
    }
    d.ds = t / s * i1;
    d.dt = i2;
    d.dss = -t / (s * s) * i3;
    d.dst = i3 / s;
    d.dtt = -i3 / t;
  } else {
    const double r = t / s, q = s / t;
    d.ds = (L - 1.0 + r) / (L * L);
    d.dt = (-L - 1.0 + q) / (L * L);
    d.dss = ((1.0 - r) * L - 2.0 * (L - 1.0 + r)) / (s * L * L * L);
    d.dtt = ((1.0 - q) * (-L) - 2.0 * (-L - 1.0 + q)) / (t * -L * L * L);
    d.dst = -s * d.dss / t;
  }
  return d;
}

double alpha(double x, double s, double t) {
  const double th = theta(s, t);
  if (th > 0.0) return x * x / th;
  return x == 0.0 ? 0.0 : kInf;
}

// ---------------------------------------------------------------------------
// Action and continuity

namespace {

void require_density(const ReversibleChain& chain, const Vector& rho) {
  if (static_cast<Index>(rho.size()) != chain.size())
    throw Error(ErrorCode::DimensionMismatch,
                "density length does not match the chain");
}

void require_path(const ReversibleChain& chain, const DensityPath& path) {
  const std::size_t T = path.V.size();
  if (T == 0 || path.rho.size() != T + 1 || path.times.size() != T + 1)
    throw Error(ErrorCode::DimensionMismatch,
                "path needs T intervals, T+1 times and T+1 densities");
  for (std::size_t k = 0; k < T; ++k)
    if (!(path.times[k + 1] > path.times[k]))
      throw Error(ErrorCode::Validation, "path times must increase");
  for (const Vector& r : path.rho) require_density(chain, r);
  for (const Matrix& V : path.V)
    if (static_cast<Index>(V.rows()) != chain.size() ||
        static_cast<Index>(V.cols()) != chain.size())
      throw Error(ErrorCode::DimensionMismatch, "momentum table has wrong shape");
}

}  // namespace

double action(const ReversibleChain& chain, const Vector& rho, const Matrix& V) {
  require_density(chain, rho);
  double total = 0.0;
  for (Index x = 0; x < chain.size(); ++x)
    for (Index y = 0; y < chain.size(); ++y) {
      if (chain.K(x, y) == 0.0) continue;
      total += alpha(V(x, y), rho(x), rho(y)) * chain.K(x, y) * chain.pi(x);
    }
  return 0.5 * total;
}

Matrix continuity_residual(const ReversibleChain& chain,
                           const DensityPath& path) {
  require_path(chain, path);
  const Index n = chain.size();
  const std::size_t T = path.V.size();
  Matrix res(T, n);
  for (std::size_t k = 0; k < T; ++k) {
    const double h = path.times[k + 1] - path.times[k];
    const Matrix& V = path.V[k];
    for (Index x = 0; x < n; ++x) {
      double div = 0.0;
      for (Index y = 0; y < n; ++y) div += (V(x, y) - V(y, x)) * chain.K(x, y);
      res(k, x) = (path.rho[k + 1](x) - path.rho[k](x)) / h + 0.5 * div;
    }
  }
  return res;
}

double path_action(const ReversibleChain& chain, const DensityPath& path) {
  require_path(chain, path);
  double total = 0.0;
  for (std::size_t k = 0; k < path.V.size(); ++k) {
    const double h = path.times[k + 1] - path.times[k];
    total += 0.5 * h *
             (action(chain, path.rho[k], path.V[k]) +
              action(chain, path.rho[k + 1], path.V[k]));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Discrete W solver

namespace {

struct Edge {
  Index x;  // tail, x < y
  Index y;
  double q;  // pi(x) K(x,y)
};

// Variables: interior densities rho_1..rho_{T-1} (n each), then the fluxes
// m_0..m_{T-1} (one per edge each). The constraints are
//   pi(x) (rho_{k+1}(x) - rho_k(x)) + h sum_e s(x,e) m_{k,e} = 0
// with s = +1 at the tail and -1 at the head of e.
class FlowProblem {
 public:
  FlowProblem(const ReversibleChain& chain, Vector rho0, Vector rho1,
              std::size_t T)
      : chain_(chain),
        rho0_(std::move(rho0)),
        rho1_(std::move(rho1)),
        n_(chain.size()),
        T_(T),
        h_(1.0 / static_cast<double>(T)) {
    for (Index x = 0; x < n_; ++x)
      for (Index y = x + 1; y < n_; ++y) {
        const double q =
            0.5 * (chain.pi(x) * chain.K(x, y) + chain.pi(y) * chain.K(y, x));
        if (q > 0.0) edges_.push_back({x, y, q});
      }
    E_ = edges_.size();
    nvar_ = (T_ - 1) * n_ + T_ * E_;
  }

  std::size_t num_vars() const { return nvar_; }
  std::size_t num_edges() const { return E_; }

  std::size_t rho_var(std::size_t k, Index x) const { return (k - 1) * n_ + x; }
  std::size_t m_var(std::size_t k, std::size_t e) const {
    return (T_ - 1) * n_ + k * E_ + e;
  }

  double rho(const Vector& z, std::size_t k, Index x) const {
    if (k == 0) return rho0_(x);
    if (k == T_) return rho1_(x);
    return z(rho_var(k, x));
  }

  Matrix constraints(Vector& rhs) const {
    Matrix A = Matrix::Zero(T_ * n_, nvar_);
    rhs = Vector::Zero(T_ * n_);
    for (std::size_t k = 0; k < T_; ++k)
      for (Index x = 0; x < n_; ++x) {
        const std::size_t row = k * n_ + x;
        const double p = chain_.pi(x);
        if (k + 1 < T_) A(row, rho_var(k + 1, x)) += p;
        else rhs(row) -= p * rho1_(x);
        if (k > 0) A(row, rho_var(k, x)) -= p;
        else rhs(row) += p * rho0_(x);
      }
    for (std::size_t k = 0; k < T_; ++k)
      for (std::size_t e = 0; e < E_; ++e) {
        A(k * n_ + edges_[e].x, m_var(k, e)) += h_;
        A(k * n_ + edges_[e].y, m_var(k, e)) -= h_;
      }
    return A;
  }

  Vector initial_point() const {
    Vector z(nvar_);
    for (std::size_t k = 1; k < T_; ++k) {
      const double s = static_cast<double>(k) * h_;
      for (Index x = 0; x < n_; ++x)
        z(rho_var(k, x)) = (1.0 - s) * rho0_(x) + s * rho1_(x);
    }
    Matrix D = Matrix::Zero(n_, E_);
    for (std::size_t e = 0; e < E_; ++e) {
      D(edges_[e].x, e) = 1.0;
      D(edges_[e].y, e) = -1.0;
    }
    const Vector source = chain_.stationary().cwiseProduct(rho0_ - rho1_);
    const Vector flux = D.completeOrthogonalDecomposition().solve(source);
    for (std::size_t k = 0; k < T_; ++k)
      for (std::size_t e = 0; e < E_; ++e) z(m_var(k, e)) = flux(e);
    return z;
  }

  bool interior_positive(const Vector& z) const {
    for (std::size_t i = 0; i < (T_ - 1) * n_; ++i)
      if (!(z(i) > 0.0)) return false;
    return true;
  }

  double objective(const Vector& z) const {
    double total = 0.0;
    for (std::size_t k = 0; k < T_; ++k)
      for (std::size_t e = 0; e < E_; ++e) {
        const Edge& ed = edges_[e];
        const double m = z(m_var(k, e));
        const double c = h_ / (2.0 * ed.q);
        total += c * m * m / theta(rho(z, k, ed.x), rho(z, k, ed.y));
        total += c * m * m / theta(rho(z, k + 1, ed.x), rho(z, k + 1, ed.y));
      }
    return total;
  }

  // Gradient and Hessian of the objective.
  void derivatives(const Vector& z, Vector& grad, Matrix& hess) const {
    grad = Vector::Zero(nvar_);
    hess = Matrix::Zero(nvar_, nvar_);
    constexpr std::size_t kFixed = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < T_; ++k)
      for (std::size_t e = 0; e < E_; ++e) {
        const Edge& ed = edges_[e];
        const std::size_t im = m_var(k, e);
        const double m = z(im);
        const double c = h_ / (2.0 * ed.q);
        for (std::size_t j : {k, k + 1}) {
          const bool free = j > 0 && j < T_;
          const std::size_t is = free ? rho_var(j, ed.x) : kFixed;
          const std::size_t it = free ? rho_var(j, ed.y) : kFixed;
          const ThetaDerivatives d =
              theta_derivatives(rho(z, j, ed.x), rho(z, j, ed.y));
          const double th = d.value, th2 = th * th, th3 = th2 * th;
          grad(im) += c * 2.0 * m / th;
          hess(im, im) += c * 2.0 / th;
          if (!free) continue;
          const double m2 = m * m;
          grad(is) += -c * m2 * d.ds / th2;
          grad(it) += -c * m2 * d.dt / th2;
          const double ms = -c * 2.0 * m * d.ds / th2;
          const double mt = -c * 2.0 * m * d.dt / th2;
          hess(im, is) += ms;
          hess(is, im) += ms;
          hess(im, it) += mt;
          hess(it, im) += mt;
          hess(is, is) += c * m2 * (2.0 * d.ds * d.ds / th3 - d.dss / th2);
          hess(it, it) += c * m2 * (2.0 * d.dt * d.dt / th3 - d.dtt / th2);
          const double st = c * m2 * (2.0 * d.ds * d.dt / th3 - d.dst / th2);
          hess(is, it) += st;
          hess(it, is) += st;
        }
      }
  }

  DensityPath to_path(const Vector& z) const {
    DensityPath path;
    for (std::size_t k = 0; k <= T_; ++k) {
      path.times.push_back(static_cast<double>(k) * h_);
      Vector r(n_);
      for (Index x = 0; x < n_; ++x) r(x) = rho(z, k, x);
      path.rho.push_back(std::move(r));
    }
    path.times.back() = 1.0;
    for (std::size_t k = 0; k < T_; ++k) {
      Matrix V = Matrix::Zero(n_, n_);
      for (std::size_t e = 0; e < E_; ++e) {
        const double v = z(m_var(k, e)) / edges_[e].q;
        V(edges_[e].x, edges_[e].y) = v;
        V(edges_[e].y, edges_[e].x) = -v;
      }
      path.V.push_back(std::move(V));
    }
    return path;
  }

 private:
  const ReversibleChain& chain_;
  Vector rho0_;
  Vector rho1_;
  Index n_;
  std::size_t T_;
  double h_;
  std::vector<Edge> edges_;
  std::size_t E_ = 0;
  std::size_t nvar_ = 0;
};

Vector prepare_density(const ReversibleChain& chain, const Vector& rho,
                       double epsilon, bool& mollified) {
  require_density(chain, rho);
  for (Index x = 0; x < chain.size(); ++x)
    if (!std::isfinite(rho(x)) || rho(x) < 0.0)
      throw Error(ErrorCode::Validation,
                  "density must be finite and nonnegative");
  if (std::abs(rho.dot(chain.stationary()) - 1.0) > 1e-9)
    throw Error(ErrorCode::Validation,
                "density must have unit mass against the stationary law");
  if (rho.minCoeff() >= epsilon) return rho;
  mollified = true;
  return (rho.array() + epsilon).matrix() / (1.0 + epsilon);
}

}  // namespace

FlowResult w_distance(const ReversibleChain& chain, const Vector& rho0,
                      const Vector& rho1, const FlowOptions& options) {
  if (options.grid == 0)
    throw Error(ErrorCode::Validation, "grid size must be positive");
  FlowResult result;
  const Vector r0 = prepare_density(chain, rho0, options.epsilon, result.mollified);
  const Vector r1 = prepare_density(chain, rho1, options.epsilon, result.mollified);

  FlowProblem problem(chain, r0, r1, options.grid);
  Vector z = problem.initial_point();
  Vector rhs;
  const Matrix A = problem.constraints(rhs);
  const auto residual_of = [&](const Vector& v) {
    return A.rows() == 0 ? 0.0 : (A * v - rhs).cwiseAbs().maxCoeff();
  };

  Matrix Z;
  if (problem.num_vars() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
    const Index rank = static_cast<Index>(qr.rank());
    const Matrix Q = qr.householderQ() *
                     Matrix::Identity(problem.num_vars(), problem.num_vars());
    Z = Q.rightCols(problem.num_vars() - rank);
  }

  double F = problem.objective(z);
  if (Z.cols() == 0) result.converged = true;
  for (std::size_t it = 0; it < options.max_iterations && !result.converged;
       ++it) {
    result.iterations = it + 1;
    Vector grad;
    Matrix hess;
    problem.derivatives(z, grad, hess);
    const Vector gr = Z.transpose() * grad;
    Matrix hr = Z.transpose() * hess * Z;
    hr = 0.5 * (hr + hr.transpose());

    Vector d;
    double shift = 0.0;
    const double diag_scale = std::max(1e-300, hr.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 40; ++attempt) {
      Matrix shifted = hr;
      shifted.diagonal().array() += shift;
      Eigen::LDLT<Matrix> ldlt(shifted);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
          (ldlt.vectorD().array() > 0.0).all()) {
        d = ldlt.solve(-gr);
        if (d.allFinite()) break;
      }
      shift = shift == 0.0 ? 1e-12 * diag_scale : shift * 10.0;
      d.resize(0);
    }
    if (d.size() == 0) break;

    const double decrement2 = -gr.dot(d);
    if (decrement2 <= 0.0 || 0.5 * decrement2 <= options.tolerance * F * 1e-2 ||
        decrement2 <= 1e-30) {
      result.converged = true;
      break;
    }
    const Vector dz = Z * d;
    double step = 1.0;
    while (step > 1e-20 && !problem.interior_positive(z + step * dz)) step *= 0.5;
    const double slope = grad.dot(dz);
    double F_new = problem.objective(z + step * dz);
    while (step > 1e-20 && !(F_new <= F + 1e-4 * step * slope)) {
      step *= 0.5;
      F_new = problem.objective(z + step * dz);
    }
    if (!(F_new <= F)) break;
    z += step * dz;
    result.relative_change = std::abs(F - F_new) / std::max(F_new, 1e-300);
    F = F_new;
    if (result.relative_change < options.tolerance &&
        residual_of(z) < options.tolerance && step == 1.0) {
      result.converged = true;
    }
  }

  result.residual = residual_of(z);
  if (result.residual >= options.tolerance) result.converged = false;
  result.action = std::max(0.0, F);
  result.value = std::sqrt(result.action);
  result.path = problem.to_path(z);
  return result;
}

// ---------------------------------------------------------------------------
// Entropy, averages, quotients

double entropy_mm(const ReversibleChain& chain, const Vector& rho) {
  require_density(chain, rho);
  double total = 0.0;
  for (Index x = 0; x < chain.size(); ++x) {
    if (rho(x) < 0.0)
      throw Error(ErrorCode::Validation, "density must be nonnegative");
    if (rho(x) > 0.0) total += rho(x) * std::log(rho(x)) * chain.pi(x);
  }
  return total;
}

void require_kernel_preserving(const ReversibleChain& chain,
                               const PermutationGroup& group) {
  const Index n = chain.size();
  if (group.degree() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "group degree does not match the chain");
  for (std::size_t g = 0; g < group.order(); ++g)
    for (Index x = 0; x < n; ++x) {
      const Index gx = group.apply(g, x);
      if (std::abs(chain.pi(gx) - chain.pi(x)) > 1e-12)
        throw Error(ErrorCode::GroupNotKernelPreserving,
                    "group element moves stationary mass at " +
                        std::to_string(x));
      for (Index y = 0; y < n; ++y)
        if (std::abs(chain.K(gx, group.apply(g, y)) - chain.K(x, y)) > 1e-12)
          throw Error(ErrorCode::GroupNotKernelPreserving,
                      "group element changes K(" + std::to_string(x) + "," +
                          std::to_string(y) + ")");
    }
}

AveragedPair g_average(const ReversibleChain& chain,
                       const PermutationGroup& group, const Vector& rho,
                       const Matrix& V) {
  require_kernel_preserving(chain, group);
  require_density(chain, rho);
  const Index n = chain.size();
  if (static_cast<Index>(V.rows()) != n || static_cast<Index>(V.cols()) != n)
    throw Error(ErrorCode::DimensionMismatch, "momentum table has wrong shape");
  const double w = 1.0 / static_cast<double>(group.order());
  AveragedPair out{Vector::Zero(n), Matrix::Zero(n, n)};
  for (std::size_t g = 0; g < group.order(); ++g)
    for (Index x = 0; x < n; ++x) {
      const Index gx = group.apply(g, x);
      out.rho(x) += w * rho(gx);
      for (Index y = 0; y < n; ++y) out.V(x, y) += w * V(gx, group.apply(g, y));
    }
  return out;
}

DensityPath g_average(const ReversibleChain& chain,
                      const PermutationGroup& group, const DensityPath& path) {
  require_path(chain, path);
  DensityPath out;
  out.times = path.times;
  const Matrix zero = Matrix::Zero(chain.size(), chain.size());
  for (const Vector& r : path.rho)
    out.rho.push_back(g_average(chain, group, r, zero).rho);
  for (const Matrix& V : path.V)
    out.V.push_back(g_average(chain, group, path.rho.front(), V).V);
  return out;
}

Vector QuotientChainMM::lift(const Vector& f) const {
  if (static_cast<Index>(f.size()) != orbits.size())
    throw Error(ErrorCode::DimensionMismatch,
                "function does not live on the quotient chain");
  Vector out(proj.size());
  for (Index x = 0; x < proj.size(); ++x) out(x) = f(proj[x]);
  return out;
}

QuotientChainMM quotient_chain_mm(const ReversibleChain& chain,
                                  const PermutationGroup& group) {
  require_kernel_preserving(chain, group);
  auto orbits = group.orbits();
  const Index k = orbits.size();
  std::vector<Index> proj(chain.size());
  for (Index a = 0; a < k; ++a)
    for (Index x : orbits[a]) proj[x] = a;

  auto fiber_row = [&](Index x) {
    Vector row = Vector::Zero(k);
    for (Index y = 0; y < chain.size(); ++y) row(proj[y]) += chain.K(x, y);
    return row;
  };
  Matrix kernel(k, k);
  Vector pi = Vector::Zero(k);
  for (Index a = 0; a < k; ++a) {
    const Vector row = fiber_row(orbits[a].front());
    for (Index x : orbits[a]) {
      if ((fiber_row(x) - row).cwiseAbs().maxCoeff() > 1e-12)
        throw Error(ErrorCode::GroupNotKernelPreserving,
                    "quotient rates depend on the representative");
      pi(a) += chain.pi(x);
    }
    kernel.row(a) = row.transpose();
  }
  return QuotientChainMM{ReversibleChain(std::move(kernel), std::move(pi)),
                         std::move(orbits), std::move(proj)};
}

IsometryReport verify_w_isometry(const ReversibleChain& chain,
                                 const PermutationGroup& group,
                                 const Vector& rho0, const Vector& rho1,
                                 const FlowOptions& options) {
  const QuotientChainMM q = quotient_chain_mm(chain, group);
  const Vector hat0 = q.lift(rho0), hat1 = q.lift(rho1);
  const FlowResult quot = w_distance(q.chain, rho0, rho1, options);
  const FlowResult base = w_distance(chain, hat0, hat1, options);
  if (!quot.converged || !base.converged)
    throw Error(ErrorCode::NotConverged,
                "discrete transport solve did not converge");

  IsometryReport report;
  report.w_quotient = quot.value;
  report.w_base = base.value;
  const double rel = std::max(1e-3, 2.0 * options.tolerance);
  report.checks.push_back(CheckResult::equal(
      "flow.w_isometry", base.value, quot.value,
      rel * std::max(base.value, quot.value)));

  auto entropy_check = [&](const std::string& name, const Vector& rho,
                           const Vector& hat) {
    const double hq = entropy_mm(q.chain, rho);
    const double hb = entropy_mm(chain, hat);
    double abs_q = 0.0, abs_b = 0.0;
    for (Index a = 0; a < q.chain.size(); ++a)
      if (rho(a) > 0.0)
        abs_q += std::abs(rho(a) * std::log(rho(a))) * q.chain.pi(a);
    for (Index x = 0; x < chain.size(); ++x)
      if (hat(x) > 0.0)
        abs_b += std::abs(hat(x) * std::log(hat(x))) * chain.pi(x);
    const double tol = summation_bound(chain.size() + 8, abs_b) +
                       summation_bound(q.chain.size() + 8, abs_q);
    report.checks.push_back(CheckResult::equal(name, hb, hq, tol));
    return std::pair{hq, hb};
  };
  std::tie(report.entropy_quotient, report.entropy_base) =
      entropy_check("flow.entropy_lift_rho0", rho0, hat0);
  entropy_check("flow.entropy_lift_rho1", rho1, hat1);
  return report;
}

}  // namespace eqot
