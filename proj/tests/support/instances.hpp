#pragma once

#include <random>
#include <utility>
#include <vector>

#include "eqot/core_spaces.hpp"
#include "eqot/discrete_flow.hpp"
#include "eqot/graph_calculus.hpp"

namespace eqot::testing {

using Rng = std::mt19937_64;

/// n-cycle with unit edges, path metric and unit masses.
FiniteMetricMeasureSpace cycle_space(Index n);

/// Points on a line at the given positions; unit masses by default.
FiniteMetricMeasureSpace line_space(const std::vector<double>& positions);

/// x -> x + k mod n.
Permutation rotation(Index n, Index k);

/// n-cycle graph with unit weights and unit measure.
WeightedGraph cycle_graph(Index n);

/// 3-cube: vertices are 3-bit words, edges flip one bit, unit weights and
/// unit measure.
WeightedGraph cube_graph();

/// Vertex permutation of the 3-cube exchanging bit i and bit j.
Permutation cube_coordinate_swap(int i, int j);

/// Simple random walk on the n-cycle, uniform stationary law.
ReversibleChain cycle_walk(Index n);

/// Unordered pairs {x, y}, x < y, grouped into orbits of the group.
std::vector<std::vector<std::pair<Index, Index>>> pair_orbits(
    const PermutationGroup& group);

/// Group generated by one or two random permutations made of disjoint short
/// cycles, redrawn until its order is at most max_order.
PermutationGroup random_small_group(Rng& rng, Index n, std::size_t max_order);

/// Random G-invariant space: edge weights in {1, 9/8, ..., 4} constant on
/// pair orbits, closed to a path metric, masses k/4 constant on orbits. All
/// data are dyadic, so invariance holds bit for bit.
QuotientSpace random_quotient(Rng& rng, Index min_points, Index max_points,
                              std::size_t max_order);

struct GraphInstance {
  WeightedGraph graph;
  PermutationGroup group;
};

/// Random graph invariant under a random group. With `dyadic`, weights are
/// integers in [1, 4] and measures powers of two, so the graph operators
/// evaluate without rounding on integer functions; otherwise weights and
/// measures are uniform reals constant on orbits.
GraphInstance random_invariant_graph(Rng& rng, Index min_vertices,
                                     Index max_vertices, std::size_t max_order,
                                     bool dyadic);

/// Integer vector with entries in [lo, hi].
Vector random_integer_vector(Rng& rng, Index n, int lo, int hi);

}  // namespace eqot::testing
