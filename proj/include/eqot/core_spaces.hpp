#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace eqot {

using Index = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Image table of a bijection of {0, ..., n-1}: point i goes to perm[i].
using Permutation = std::vector<Index>;

inline constexpr std::size_t kDefaultClosureCap = 10080;

/// Absolute tolerance for identities that pass through an LP or an eigen-solve.
inline constexpr double kSolverTolerance = 1e-9;

/// A finite metric space with a strictly positive mass on every point.
///
/// The distance table is validated on construction (zero diagonal, symmetry,
/// positivity off the diagonal, triangle inequality up to a relative 1e-12
/// rounding slack). Instances are immutable.
class FiniteMetricMeasureSpace {
 public:
  FiniteMetricMeasureSpace(std::vector<std::string> labels, Matrix distance,
                           Vector mass);

  /// Labels default to "0", "1", ...
  FiniteMetricMeasureSpace(Matrix distance, Vector mass);

  Index size() const { return static_cast<Index>(mass_.size()); }
  double dist(Index x, Index y) const { return distance_(x, y); }
  double mass(Index x) const { return mass_(x); }
  const Matrix& distance() const { return distance_; }
  const Vector& masses() const { return mass_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(Index x) const { return labels_[x]; }
  double total_mass() const;
  double diameter() const;

  /// Sorted distinct entries of the distance table (including 0).
  std::vector<double> realized_distances() const;

 private:
  std::vector<std::string> labels_;
  Matrix distance_;
  Vector mass_;
};

/// Finite permutation group given by an explicit closure of its generators.
/// Element 0 is always the identity; the remaining elements appear in
/// breadth-first order of words in the generators.
class PermutationGroup {
 public:
  static PermutationGroup generate(Index degree,
                                   std::vector<Permutation> generators,
                                   std::size_t cap = kDefaultClosureCap);
  static PermutationGroup trivial(Index degree);

  Index degree() const { return degree_; }
  std::size_t order() const { return elements_.size(); }
  const std::vector<Permutation>& elements() const { return elements_; }
  const std::vector<Permutation>& generators() const { return generators_; }
  const Permutation& element(std::size_t g) const { return elements_[g]; }
  Index apply(std::size_t g, Index x) const { return elements_[g][x]; }

  std::size_t index_of(const Permutation& perm) const;
  std::size_t compose(std::size_t a, std::size_t b) const;  ///< a after b
  std::size_t inverse(std::size_t a) const;

  /// Orbits as sorted point lists, ordered by their smallest member.
  std::vector<std::vector<Index>> orbits() const;
  /// Indices of the elements fixing x.
  std::vector<std::size_t> stabilizer(Index x) const;
  /// Only the identity fixes every point.
  bool is_effective() const;

 private:
  PermutationGroup(Index degree, std::vector<Permutation> generators,
                   std::vector<Permutation> elements);

  Index degree_ = 0;
  std::vector<Permutation> generators_;
  std::vector<Permutation> elements_;
};

/// Validates that perm is a bijection of {0, ..., n-1}; throws Validation.
void require_permutation(const Permutation& perm, Index n);

/// A permutation group acting on a space by measure-preserving isometries.
class GroupAction {
 public:
  /// Verifies every generator of the group against the base space.
  /// Throws GeneratorNotIsometry / GeneratorNotMeasurePreserving.
  GroupAction(FiniteMetricMeasureSpace base, PermutationGroup group);

  const FiniteMetricMeasureSpace& base() const { return base_; }
  const PermutationGroup& group() const { return group_; }
  std::size_t order() const { return group_.order(); }
  bool effective() const { return effective_; }

 private:
  FiniteMetricMeasureSpace base_;
  PermutationGroup group_;
  bool effective_ = true;
};

/// Closes the generators under composition and validates the action.
/// An ineffective action is accepted; callers inspect `effective()`.
GroupAction build_group(const FiniteMetricMeasureSpace& base,
                        std::vector<Permutation> generators,
                        std::size_t cap = kDefaultClosureCap);

/// Orbit space of a group action with the quotient metric
/// d*(x*, y*) = min over representatives and pushforward masses.
class QuotientSpace {
 public:
  explicit QuotientSpace(GroupAction action);

  const GroupAction& action() const { return action_; }
  const FiniteMetricMeasureSpace& base() const { return action_.base(); }
  const FiniteMetricMeasureSpace& qspace() const { return qspace_; }
  const std::vector<std::vector<Index>>& orbits() const { return orbits_; }
  const std::vector<Index>& orbit(Index orbit_index) const {
    return orbits_[orbit_index];
  }
  Index proj(Index x) const { return proj_[x]; }
  const std::vector<Index>& projection() const { return proj_; }
  /// Smallest point of the orbit.
  Index representative(Index orbit_index) const {
    return orbits_[orbit_index].front();
  }
  Index size() const { return static_cast<Index>(orbits_.size()); }

 private:
  GroupAction action_;
  std::vector<std::vector<Index>> orbits_;
  std::vector<Index> proj_;
  FiniteMetricMeasureSpace qspace_;
};

QuotientSpace quotient(const GroupAction& action);

/// Conditional probabilities of the reference mass on each leaf.
struct Disintegration {
  std::vector<Vector> family;  ///< family[leaf] is a distribution on points
};

Disintegration disintegrate(const FiniteMetricMeasureSpace& space,
                            const std::vector<std::vector<Index>>& leaves);

/// Max |sum_leaf mass*(leaf) family(leaf)(x) - mass(x)| over points.
double reconstruction_error(const FiniteMetricMeasureSpace& space,
                            const std::vector<std::vector<Index>>& leaves,
                            const Disintegration& dis);

/// Partition of the points of a space into leaves, optionally carrying one
/// conditional probability per leaf.
class LeafPartition {
 public:
  LeafPartition(FiniteMetricMeasureSpace space,
                std::vector<std::vector<Index>> leaves,
                std::optional<std::vector<Vector>> conditionals = std::nullopt);

  /// Leaves are the orbits; conditionals are the orbit-uniform measures.
  static LeafPartition from_orbits(const QuotientSpace& q);

  const FiniteMetricMeasureSpace& space() const { return space_; }
  const std::vector<std::vector<Index>>& leaves() const { return leaves_; }
  const std::optional<std::vector<Vector>>& conditionals() const {
    return conditionals_;
  }
  Index leaf_of(Index x) const { return leaf_of_[x]; }

  /// d(F, G) = min over pairs of representatives.
  double leaf_distance(Index f, Index g) const;

 private:
  FiniteMetricMeasureSpace space_;
  std::vector<std::vector<Index>> leaves_;
  std::optional<std::vector<Vector>> conditionals_;
  std::vector<Index> leaf_of_;
};

struct OrbitCensus {
  std::vector<std::size_t> isotropy_order;       ///< |G_x| per point
  std::vector<std::size_t> isotropy_class;       ///< conjugacy class per point
  std::vector<std::vector<Index>> class_points;  ///< points per class
  std::vector<std::size_t> class_isotropy_order;
  std::size_t principal_class = 0;
  std::size_t principal_isotropy_order = 1;
  /// Mass fraction carried by the principal class.
  double principal_fraction = 1.0;
};

/// Isotropy subgroups up to conjugacy; the class of minimal isotropy order is
/// reported as the principal candidate (largest mass among ties). This is a
/// descriptive census, not a uniqueness certificate.
OrbitCensus orbit_census(const GroupAction& action);

struct SubmetryWitness {
  Index point;
  double radius;
};

struct SubmetryResult {
  bool holds = true;
  std::optional<SubmetryWitness> witness;
};

/// Closed-ball test f(B_r(x)) == B_r(f(x)) at every realized distance of
/// either space, every midpoint between consecutive realized distances, and
/// one radius beyond the largest. Throws NotSurjective.
SubmetryResult check_submetry(const FiniteMetricMeasureSpace& domain,
                              const FiniteMetricMeasureSpace& codomain,
                              const std::vector<Index>& map);

struct FoliationWitness {
  Index leaf_f;
  Index leaf_g;
  Index point;  ///< a point of leaf_f with d(point, G) != d(F, G)
};

struct FoliationResult {
  bool holds = true;
  std::optional<FoliationWitness> witness;
};

FoliationResult check_metric_foliation(const LeafPartition& part);

struct MmFoliationResult {
  bool holds = true;
  double max_deviation = 0.0;
  Index worst_f = 0;
  Index worst_g = 0;
};

/// W_p between leaf conditionals versus the leaf distance, for every leaf
/// pair. Conditionals default to the disintegration of the reference mass.
/// Throws ConditionalNotSupported when a conditional charges a point outside
/// its leaf.
MmFoliationResult check_mm_foliation(const LeafPartition& part, double p = 2.0,
                                     double tolerance = kSolverTolerance);

}  // namespace eqot
