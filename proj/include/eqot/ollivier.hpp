#pragma once

#include <vector>

#include "eqot/core_spaces.hpp"
#include "eqot/report.hpp"

namespace eqot {

/// A Markov kernel on the points of a metric measure space: row x is the
/// one-step distribution mu_x.
class MarkovChain {
 public:
  /// Rows must be nonnegative and sum to 1 within 1e-12.
  MarkovChain(FiniteMetricMeasureSpace space, Matrix kernel);

  const FiniteMetricMeasureSpace& space() const { return space_; }
  const Matrix& kernel() const { return kernel_; }
  Vector row(Index x) const { return kernel_.row(x).transpose(); }
  Index size() const { return space_.size(); }

  static MarkovChain identity(const FiniteMetricMeasureSpace& space);
  /// Every row equals `mu`.
  static MarkovChain mixing(const FiniteMetricMeasureSpace& space,
                            const Vector& mu);

 private:
  FiniteMetricMeasureSpace space_;
  Matrix kernel_;
};

/// kappa(x, y) = 1 - W_1(mu_x, mu_y) / d(x, y). Throws SamePoint.
double coarse_ricci(const MarkovChain& chain, Index x, Index y);

struct CurvatureEntry {
  Index x;
  Index y;
  double kappa;
};

/// kappa for every ordered pair x != y. kappa is symmetric, so each
/// unordered pair is solved once and reported twice.
std::vector<CurvatureEntry> curvature_table(const MarkovChain& chain);

/// Minimum of kappa over distinct pairs; +inf on a one-point space.
double min_coarse_ricci(const MarkovChain& chain);

/// (1/|G|) sum_g p_# mu_{gx} evaluated at the given base point x.
Vector quotient_chain_row(const MarkovChain& chain, const QuotientSpace& q,
                          Index x);

/// Chain on the orbit space with rows (1/|O|) sum_{z in O} p_# mu_z, which
/// equals quotient_chain_row at every representative of O.
MarkovChain quotient_chain(const MarkovChain& chain, const QuotientSpace& q);

/// Max deviation of quotient_chain_row over all representatives of each
/// orbit from the canonical quotient row.
double quotient_row_spread(const MarkovChain& chain, const QuotientSpace& q);

/// x -> (1/|G|) sum_g mu_{gx} on the base space.
MarkovChain averaged_chain(const MarkovChain& chain, const PermutationGroup& group);

/// g_# mu_x == mu_{gx} for every element and point, within tol.
bool is_g_invariant(const MarkovChain& chain, const PermutationGroup& group,
                    double tol = 1e-12);

struct OllivierPreservation {
  double k = 0.0;
  double k_star = 0.0;
  CheckResult check;
};

/// k = min kappa on the base, k* = min kappa on the quotient chain and the
/// one-sided check k* >= k - 1e-8.
OllivierPreservation verify_ollivier_preservation(const MarkovChain& chain,
                                                  const QuotientSpace& q);

/// k*(x*, y*) = max over (x, y) with d(x, y) = d*(x*, y*) of
/// (1/|G|) sum_g k(gx, gy). Only off-diagonal entries of `k` are read; the
/// diagonal of the result is 0. Throws NoODRepresentative.
Matrix varying_bound_kstar(const Matrix& k, const QuotientSpace& q);

}  // namespace eqot
