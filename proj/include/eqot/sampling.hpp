#pragma once

#include <random>

#include "eqot/core_spaces.hpp"
#include "eqot/discrete_flow.hpp"
#include "eqot/ollivier.hpp"
#include "eqot/transport.hpp"

namespace eqot {

using Rng = std::mt19937_64;

/// Probability vector with independent Exp(1) weights, a fraction of them
/// zeroed when `sparsity` > 0 (at least one weight stays positive).
Measure random_measure(Rng& rng, Index n, double sparsity = 0.0);

/// Uniform entries in [lo, hi].
Vector random_vector(Rng& rng, Index n, double lo, double hi);

/// Random kernel averaged over the group: K(x,y) = (1/|G|) sum_g R(gx, gy).
MarkovChain random_invariant_chain(Rng& rng, const QuotientSpace& q);

/// Positive density with unit mass against `pi`, entries within a factor
/// `spread` of each other.
Vector random_density(Rng& rng, const Vector& pi, double spread);

}  // namespace eqot
