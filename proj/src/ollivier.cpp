#include "eqot/ollivier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eqot/equivariant.hpp"
#include "eqot/error.hpp"
#include "eqot/transport.hpp"

namespace eqot {

MarkovChain::MarkovChain(FiniteMetricMeasureSpace space, Matrix kernel)
    : space_(std::move(space)), kernel_(std::move(kernel)) {
  const Index n = space_.size();
  if (static_cast<Index>(kernel_.rows()) != n ||
      static_cast<Index>(kernel_.cols()) != n)
    throw Error(ErrorCode::DimensionMismatch,
                "kernel must be " + std::to_string(n) + " x " +
                    std::to_string(n));
  for (Index x = 0; x < n; ++x) {
    double total = 0.0;
    for (Index y = 0; y < n; ++y) {
      const double w = kernel_(x, y);
      if (!std::isfinite(w) || w < 0.0)
        throw Error(ErrorCode::Validation,
                    "kernel entry (" + std::to_string(x) + "," +
                        std::to_string(y) + ") must be finite and nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw Error(ErrorCode::Validation,
                  "kernel row " + std::to_string(x) + " does not sum to 1");
  }
}

MarkovChain MarkovChain::identity(const FiniteMetricMeasureSpace& space) {
  return MarkovChain(space, Matrix::Identity(space.size(), space.size()));
}

MarkovChain MarkovChain::mixing(const FiniteMetricMeasureSpace& space,
                                const Vector& mu) {
  Matrix k(space.size(), space.size());
  for (Index x = 0; x < space.size(); ++x) k.row(x) = mu.transpose();
  return MarkovChain(space, std::move(k));
}

double coarse_ricci(const MarkovChain& chain, Index x, Index y) {
  if (x == y)
    throw Error(ErrorCode::SamePoint, "coarse Ricci curvature needs x != y");
  const auto& space = chain.space();
  const double w1 = wasserstein(space, Measure::normalized(chain.row(x)),
                                Measure::normalized(chain.row(y)), 1.0)
                        .value;
  return 1.0 - w1 / space.dist(x, y);
}

std::vector<CurvatureEntry> curvature_table(const MarkovChain& chain) {
  const Index n = chain.size();
  Matrix kappa = Matrix::Zero(n, n);
  for (Index x = 0; x < n; ++x)
    for (Index y = x + 1; y < n; ++y) kappa(x, y) = kappa(y, x) =
        coarse_ricci(chain, x, y);
  std::vector<CurvatureEntry> out;
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (x != y) out.push_back({x, y, kappa(x, y)});
  return out;
}

double min_coarse_ricci(const MarkovChain& chain) {
  double best = std::numeric_limits<double>::infinity();
  for (Index x = 0; x < chain.size(); ++x)
    for (Index y = x + 1; y < chain.size(); ++y)
      best = std::min(best, coarse_ricci(chain, x, y));
  return best;
}

namespace {

// p_# mu_z as a vector on the orbits.
Vector pushed_row(const MarkovChain& chain, const QuotientSpace& q, Index z) {
  Vector row = Vector::Zero(q.size());
  for (Index y = 0; y < chain.size(); ++y) row(q.proj(y)) += chain.kernel()(z, y);
  return row;
}

// Running mean update for the count-th term. Equal terms leave the mean
// bit-identical to each of them, which sum-then-divide does not guarantee.
void accumulate_mean(Vector& mean, const Vector& term, std::size_t count) {
  mean += (term - mean) / static_cast<double>(count);
}

}  // namespace

Vector quotient_chain_row(const MarkovChain& chain, const QuotientSpace& q,
                          Index x) {
  const auto& group = q.action().group();
  Vector mean = Vector::Zero(q.size());
  for (std::size_t g = 0; g < group.order(); ++g)
    accumulate_mean(mean, pushed_row(chain, q, group.apply(g, x)), g + 1);
  return mean;
}

MarkovChain quotient_chain(const MarkovChain& chain, const QuotientSpace& q) {
  if (chain.size() != q.base().size())
    throw Error(ErrorCode::DimensionMismatch,
                "chain does not live on the quotient's base");
  const Index k = q.size();
  Matrix kernel = Matrix::Zero(k, k);
  for (Index a = 0; a < k; ++a) {
    Vector mean = Vector::Zero(k);
    std::size_t count = 0;
    for (Index z : q.orbit(a)) accumulate_mean(mean, pushed_row(chain, q, z), ++count);
    kernel.row(a) = mean.transpose();
  }
  return MarkovChain(q.qspace(), std::move(kernel));
}

double quotient_row_spread(const MarkovChain& chain, const QuotientSpace& q) {
  const MarkovChain qc = quotient_chain(chain, q);
  double spread = 0.0;
  for (Index x = 0; x < chain.size(); ++x) {
    const Vector row = quotient_chain_row(chain, q, x);
    spread = std::max(spread, (row - qc.row(q.proj(x))).cwiseAbs().maxCoeff());
  }
  return spread;
}

MarkovChain averaged_chain(const MarkovChain& chain,
                           const PermutationGroup& group) {
  const Index n = chain.size();
  Matrix kernel = Matrix::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    for (std::size_t g = 0; g < group.order(); ++g)
      kernel.row(x) += chain.kernel().row(group.apply(g, x));
    kernel.row(x) /= static_cast<double>(group.order());
  }
  return MarkovChain(chain.space(), std::move(kernel));
}

bool is_g_invariant(const MarkovChain& chain, const PermutationGroup& group,
                    double tol) {
  const Index n = chain.size();
  for (std::size_t g = 0; g < group.order(); ++g)
    for (Index x = 0; x < n; ++x)
      for (Index y = 0; y < n; ++y)
        if (std::abs(chain.kernel()(x, y) -
                     chain.kernel()(group.apply(g, x), group.apply(g, y))) > tol)
          return false;
  return true;
}

OllivierPreservation verify_ollivier_preservation(const MarkovChain& chain,
                                                  const QuotientSpace& q) {
  OllivierPreservation out;
  out.k = min_coarse_ricci(chain);
  out.k_star = min_coarse_ricci(quotient_chain(chain, q));
  out.check =
      CheckResult::at_least("ollivier.k_star_ge_k", out.k_star, out.k, 1e-8);
  return out;
}

Matrix varying_bound_kstar(const Matrix& k, const QuotientSpace& q) {
  const Index n = q.base().size();
  if (static_cast<Index>(k.rows()) != n || static_cast<Index>(k.cols()) != n)
    throw Error(ErrorCode::DimensionMismatch,
                "bound must be a table on the base space");
  const auto& group = q.action().group();
  const double w = 1.0 / static_cast<double>(group.order());
  const Index m = q.size();
  Matrix out = Matrix::Zero(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) {
      if (a == b) continue;
      double best = -std::numeric_limits<double>::infinity();
      bool found = false;
      for (Index x : q.orbit(a))
        for (Index y : q.orbit(b)) {
          if (!in_orbit_distance_set(q, x, y)) continue;
          double avg = 0.0;
          for (std::size_t g = 0; g < group.order(); ++g)
            avg += k(group.apply(g, x), group.apply(g, y));
          best = std::max(best, avg * w);
          found = true;
        }
      if (!found)
        throw Error(ErrorCode::NoODRepresentative,
                    "orbits " + std::to_string(a) + " and " +
                        std::to_string(b) + " have no realizing pair");
      out(a, b) = best;
    }
  return out;
}

}  // namespace eqot
