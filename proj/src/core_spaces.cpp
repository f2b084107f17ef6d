#include "eqot/core_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

#include "eqot/error.hpp"

namespace eqot {

namespace {

std::vector<std::string> default_labels(Index n) {
  std::vector<std::string> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

Permutation identity_permutation(Index n) {
  Permutation id(n);
  std::iota(id.begin(), id.end(), Index{0});
  return id;
}

Permutation compose_perm(const Permutation& a, const Permutation& b) {
  Permutation out(b.size());
  for (Index i = 0; i < b.size(); ++i) out[i] = a[b[i]];
  return out;
}

std::string describe(const Permutation& perm) {
  std::ostringstream os;
  os << '[';
  for (Index i = 0; i < perm.size(); ++i) os << (i ? "," : "") << perm[i];
  os << ']';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// FiniteMetricMeasureSpace

FiniteMetricMeasureSpace::FiniteMetricMeasureSpace(Matrix distance, Vector mass)
    : FiniteMetricMeasureSpace(default_labels(static_cast<Index>(mass.size())),
                               distance, mass) {}

FiniteMetricMeasureSpace::FiniteMetricMeasureSpace(
    std::vector<std::string> labels, Matrix distance, Vector mass)
    : labels_(std::move(labels)),
      distance_(std::move(distance)),
      mass_(std::move(mass)) {
  const Index n = static_cast<Index>(mass_.size());
  if (n == 0) throw Error(ErrorCode::Validation, "space has no points");
  if (labels_.size() != n)
    throw Error(ErrorCode::Validation, "label count does not match mass count");
  if (static_cast<Index>(distance_.rows()) != n ||
      static_cast<Index>(distance_.cols()) != n)
    throw Error(ErrorCode::Validation, "distance table must be square n x n");
  for (Index x = 0; x < n; ++x) {
    if (!(mass_(x) > 0.0) || !std::isfinite(mass_(x)))
      throw Error(ErrorCode::Validation,
                  "mass of point " + std::to_string(x) + " must be positive");
    if (distance_(x, x) != 0.0)
      throw Error(ErrorCode::Validation,
                  "dist(x,x) != 0 at point " + std::to_string(x));
    for (Index y = 0; y < n; ++y) {
      const double d = distance_(x, y);
      if (!std::isfinite(d) || d < 0.0)
        throw Error(ErrorCode::Validation, "distance must be finite and >= 0");
      if (d != distance_(y, x))
        throw Error(ErrorCode::Validation,
                    "distance not symmetric at (" + std::to_string(x) + "," +
                        std::to_string(y) + ")");
      if (x != y && !(d > 0.0))
        throw Error(ErrorCode::Validation,
                    "distinct points at zero distance (" + std::to_string(x) +
                        "," + std::to_string(y) + ")");
    }
  }
  const double slack = 1e-12 * std::max(1.0, distance_.maxCoeff());
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      for (Index z = 0; z < n; ++z)
        if (distance_(x, z) > distance_(x, y) + distance_(y, z) + slack)
          throw Error(ErrorCode::Validation,
                      "triangle inequality fails at (" + std::to_string(x) +
                          "," + std::to_string(y) + "," + std::to_string(z) +
                          ")");
}

double FiniteMetricMeasureSpace::total_mass() const {
  double total = 0.0;
  for (Index x = 0; x < size(); ++x) total += mass_(x);
  return total;
}

double FiniteMetricMeasureSpace::diameter() const {
  return distance_.maxCoeff();
}

std::vector<double> FiniteMetricMeasureSpace::realized_distances() const {
  std::vector<double> values(distance_.data(),
                             distance_.data() + distance_.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

// ---------------------------------------------------------------------------
// PermutationGroup

void require_permutation(const Permutation& perm, Index n) {
  if (perm.size() != n)
    throw Error(ErrorCode::Validation,
                "permutation " + describe(perm) + " has wrong length (expected " +
                    std::to_string(n) + ")");
  std::vector<bool> seen(n, false);
  for (Index image : perm) {
    if (image >= n || seen[image])
      throw Error(ErrorCode::Validation,
                  "permutation " + describe(perm) + " is not a bijection");
    seen[image] = true;
  }
}

PermutationGroup::PermutationGroup(Index degree,
                                   std::vector<Permutation> generators,
                                   std::vector<Permutation> elements)
    : degree_(degree),
      generators_(std::move(generators)),
      elements_(std::move(elements)) {}

PermutationGroup PermutationGroup::trivial(Index degree) {
  return PermutationGroup(degree, {}, {identity_permutation(degree)});
}

PermutationGroup PermutationGroup::generate(Index degree,
                                            std::vector<Permutation> generators,
                                            std::size_t cap) {
  for (const auto& g : generators) require_permutation(g, degree);

  std::vector<Permutation> elements{identity_permutation(degree)};
  std::map<Permutation, std::size_t> seen{{elements.front(), 0}};
  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    const std::size_t current = frontier.front();
    frontier.pop_front();
    for (const auto& gen : generators) {
      Permutation next = compose_perm(gen, elements[current]);
      if (seen.count(next)) continue;
      if (elements.size() >= cap)
        throw Error(ErrorCode::ClosureExceedsCap,
                    "group closure exceeds cap of " + std::to_string(cap) +
                        " elements");
      seen.emplace(next, elements.size());
      elements.push_back(std::move(next));
      frontier.push_back(elements.size() - 1);
    }
  }
  return PermutationGroup(degree, std::move(generators), std::move(elements));
}

std::size_t PermutationGroup::index_of(const Permutation& perm) const {
  for (std::size_t g = 0; g < elements_.size(); ++g)
    if (elements_[g] == perm) return g;
  throw Error(ErrorCode::Validation,
              "permutation " + describe(perm) + " is not a group element");
}

std::size_t PermutationGroup::compose(std::size_t a, std::size_t b) const {
  return index_of(compose_perm(elements_[a], elements_[b]));
}

std::size_t PermutationGroup::inverse(std::size_t a) const {
  Permutation inv(degree_);
  for (Index i = 0; i < degree_; ++i) inv[elements_[a][i]] = i;
  return index_of(inv);
}

std::vector<std::vector<Index>> PermutationGroup::orbits() const {
  // Union of generator images; equivalent to the closure's orbits.
  std::vector<Index> parent(degree_);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& gen : generators_)
    for (Index x = 0; x < degree_; ++x) {
      const Index a = find(x), b = find(gen[x]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::map<Index, std::vector<Index>> grouped;
  for (Index x = 0; x < degree_; ++x) grouped[find(x)].push_back(x);
  std::vector<std::vector<Index>> out;
  out.reserve(grouped.size());
  for (auto& [root, members] : grouped) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<std::size_t> PermutationGroup::stabilizer(Index x) const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < elements_.size(); ++g)
    if (elements_[g][x] == x) out.push_back(g);
  return out;
}

bool PermutationGroup::is_effective() const {
  for (std::size_t g = 1; g < elements_.size(); ++g) {
    bool fixes_all = true;
    for (Index x = 0; x < degree_ && fixes_all; ++x)
      fixes_all = elements_[g][x] == x;
    if (fixes_all) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// GroupAction

GroupAction::GroupAction(FiniteMetricMeasureSpace base, PermutationGroup group)
    : base_(std::move(base)), group_(std::move(group)) {
  const Index n = base_.size();
  if (group_.degree() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "group degree does not match the number of points");
  const double slack = 1e-12 * std::max(1.0, base_.diameter());
  // Generators suffice: isometries and mass-preserving maps form a group.
  const auto& gens =
      group_.generators().empty() ? group_.elements() : group_.generators();
  for (const auto& g : gens) {
    for (Index x = 0; x < n; ++x) {
      if (std::abs(base_.mass(g[x]) - base_.mass(x)) >
          1e-12 * std::max(1.0, base_.mass(x)))
        throw Error(ErrorCode::GeneratorNotMeasurePreserving,
                    "generator " + describe(g) + " moves mass at point " +
                        base_.label(x));
      for (Index y = x + 1; y < n; ++y)
        if (std::abs(base_.dist(g[x], g[y]) - base_.dist(x, y)) > slack)
          throw Error(ErrorCode::GeneratorNotIsometry,
                      "generator " + describe(g) + " changes dist(" +
                          base_.label(x) + "," + base_.label(y) + ")");
    }
  }
  effective_ = group_.is_effective();
}

GroupAction build_group(const FiniteMetricMeasureSpace& base,
                        std::vector<Permutation> generators, std::size_t cap) {
  for (const auto& g : generators) require_permutation(g, base.size());
  PermutationGroup group =
      PermutationGroup::generate(base.size(), std::move(generators), cap);
  return GroupAction(base, std::move(group));
}

// ---------------------------------------------------------------------------
// QuotientSpace

namespace {

FiniteMetricMeasureSpace build_orbit_space(
    const FiniteMetricMeasureSpace& base,
    const std::vector<std::vector<Index>>& orbits) {
  const Index k = static_cast<Index>(orbits.size());
  Matrix dstar(k, k);
  Vector mstar(k);
  std::vector<std::string> labels(k);
  for (Index a = 0; a < k; ++a) {
    double m = 0.0;
    std::string label = "{";
    for (Index i = 0; i < orbits[a].size(); ++i) {
      m += base.mass(orbits[a][i]);
      label += (i ? "," : "") + base.label(orbits[a][i]);
    }
    mstar(a) = m;
    labels[a] = label + "}";
    for (Index b = 0; b < k; ++b) {
      double best = std::numeric_limits<double>::infinity();
      for (Index x : orbits[a])
        for (Index y : orbits[b]) best = std::min(best, base.dist(x, y));
      dstar(a, b) = best;
    }
  }
  try {
    return FiniteMetricMeasureSpace(std::move(labels), std::move(dstar),
                                    std::move(mstar));
  } catch (const Error& e) {
    throw Error(ErrorCode::QuotientNotMetric, e.what());
  }
}

}  // namespace

QuotientSpace::QuotientSpace(GroupAction action)
    : action_(std::move(action)),
      orbits_(action_.group().orbits()),
      proj_(action_.base().size()),
      qspace_(build_orbit_space(action_.base(), orbits_)) {
  for (Index a = 0; a < orbits_.size(); ++a)
    for (Index x : orbits_[a]) proj_[x] = a;
}

QuotientSpace quotient(const GroupAction& action) {
  return QuotientSpace(action);
}

// ---------------------------------------------------------------------------
// Disintegration and leaves

Disintegration disintegrate(const FiniteMetricMeasureSpace& space,
                            const std::vector<std::vector<Index>>& leaves) {
  Disintegration dis;
  dis.family.reserve(leaves.size());
  for (const auto& leaf : leaves) {
    Vector cond = Vector::Zero(space.size());
    double total = 0.0;
    for (Index x : leaf) total += space.mass(x);
    for (Index x : leaf) cond(x) = space.mass(x) / total;
    dis.family.push_back(std::move(cond));
  }
  return dis;
}

double reconstruction_error(const FiniteMetricMeasureSpace& space,
                            const std::vector<std::vector<Index>>& leaves,
                            const Disintegration& dis) {
  Vector rebuilt = Vector::Zero(space.size());
  for (Index f = 0; f < leaves.size(); ++f) {
    double leaf_mass = 0.0;
    for (Index x : leaves[f]) leaf_mass += space.mass(x);
    rebuilt += leaf_mass * dis.family[f];
  }
  return (rebuilt - space.masses()).cwiseAbs().maxCoeff();
}

LeafPartition::LeafPartition(FiniteMetricMeasureSpace space,
                             std::vector<std::vector<Index>> leaves,
                             std::optional<std::vector<Vector>> conditionals)
    : space_(std::move(space)),
      leaves_(std::move(leaves)),
      conditionals_(std::move(conditionals)) {
  const Index n = space_.size();
  constexpr Index kUnset = static_cast<Index>(-1);
  leaf_of_.assign(n, kUnset);
  for (Index f = 0; f < leaves_.size(); ++f) {
    if (leaves_[f].empty())
      throw Error(ErrorCode::Validation,
                  "leaf " + std::to_string(f) + " is empty");
    for (Index x : leaves_[f]) {
      if (x >= n)
        throw Error(ErrorCode::Validation,
                    "leaf index " + std::to_string(x) + " out of range");
      if (leaf_of_[x] != kUnset)
        throw Error(ErrorCode::Validation,
                    "point " + std::to_string(x) + " lies in two leaves");
      leaf_of_[x] = f;
    }
  }
  for (Index x = 0; x < n; ++x)
    if (leaf_of_[x] == kUnset)
      throw Error(ErrorCode::Validation,
                  "point " + std::to_string(x) + " is not covered by a leaf");
  if (conditionals_) {
    if (conditionals_->size() != leaves_.size())
      throw Error(ErrorCode::Validation,
                  "one conditional per leaf is required");
    for (const auto& c : *conditionals_)
      if (static_cast<Index>(c.size()) != n)
        throw Error(ErrorCode::Validation,
                    "conditional length must equal the number of points");
  }
}

LeafPartition LeafPartition::from_orbits(const QuotientSpace& q) {
  const auto& group = q.action().group();
  std::vector<Vector> cond;
  for (Index a = 0; a < q.size(); ++a) {
    Vector nu = Vector::Zero(q.base().size());
    const Index rep = q.representative(a);
    const double w = 1.0 / static_cast<double>(group.order());
    for (std::size_t g = 0; g < group.order(); ++g) nu(group.apply(g, rep)) += w;
    cond.push_back(std::move(nu));
  }
  return LeafPartition(q.base(), q.orbits(), std::move(cond));
}

double LeafPartition::leaf_distance(Index f, Index g) const {
  double best = std::numeric_limits<double>::infinity();
  for (Index x : leaves_[f])
    for (Index y : leaves_[g]) best = std::min(best, space_.dist(x, y));
  return best;
}

// ---------------------------------------------------------------------------
// Orbit census

OrbitCensus orbit_census(const GroupAction& action) {
  const auto& group = action.group();
  const auto& space = action.base();
  const Index n = space.size();

  OrbitCensus census;
  census.isotropy_order.resize(n);
  census.isotropy_class.resize(n);

  std::vector<std::vector<std::size_t>> stabilizers(n);
  for (Index x = 0; x < n; ++x) {
    stabilizers[x] = group.stabilizer(x);
    census.isotropy_order[x] = stabilizers[x].size();
  }

  auto conjugate = [&](const std::vector<std::size_t>& h,
                       const std::vector<std::size_t>& k) {
    if (h.size() != k.size()) return false;
    for (std::size_t g = 0; g < group.order(); ++g) {
      const std::size_t ginv = group.inverse(g);
      bool all = true;
      for (std::size_t e : h) {
        const std::size_t c = group.compose(g, group.compose(e, ginv));
        if (!std::binary_search(k.begin(), k.end(), c)) {
          all = false;
          break;
        }
      }
      if (all) return true;
    }
    return false;
  };

  std::vector<std::size_t> class_rep;  // a point representing each class
  for (Index x = 0; x < n; ++x) {
    std::size_t cls = class_rep.size();
    for (std::size_t c = 0; c < class_rep.size(); ++c)
      if (conjugate(stabilizers[x], stabilizers[class_rep[c]])) {
        cls = c;
        break;
      }
    if (cls == class_rep.size()) {
      class_rep.push_back(x);
      census.class_points.emplace_back();
      census.class_isotropy_order.push_back(stabilizers[x].size());
    }
    census.isotropy_class[x] = cls;
    census.class_points[cls].push_back(x);
  }

  const double total = space.total_mass();
  std::size_t best = 0;
  double best_mass = -1.0;
  for (std::size_t c = 0; c < class_rep.size(); ++c) {
    double m = 0.0;
    for (Index x : census.class_points[c]) m += space.mass(x);
    const bool smaller =
        census.class_isotropy_order[c] < census.class_isotropy_order[best];
    const bool tie =
        census.class_isotropy_order[c] == census.class_isotropy_order[best];
    if (best_mass < 0.0 || smaller || (tie && m > best_mass)) {
      best = c;
      best_mass = m;
    }
  }
  census.principal_class = best;
  census.principal_isotropy_order = census.class_isotropy_order[best];
  census.principal_fraction =
      census.class_points[best].size() == n ? 1.0 : best_mass / total;
  return census;
}

// ---------------------------------------------------------------------------
// Submetry and metric foliation

SubmetryResult check_submetry(const FiniteMetricMeasureSpace& domain,
                              const FiniteMetricMeasureSpace& codomain,
                              const std::vector<Index>& map) {
  const Index n = domain.size();
  const Index m = codomain.size();
  if (map.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "map must assign an image to every point");
  std::vector<bool> hit(m, false);
  for (Index x = 0; x < n; ++x) {
    if (map[x] >= m)
      throw Error(ErrorCode::Validation, "map image out of range");
    hit[map[x]] = true;
  }
  for (Index y = 0; y < m; ++y)
    if (!hit[y])
      throw Error(ErrorCode::NotSurjective,
                  "point " + codomain.label(y) + " has no preimage");

  std::vector<double> radii = domain.realized_distances();
  const auto co = codomain.realized_distances();
  radii.insert(radii.end(), co.begin(), co.end());
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  std::vector<double> probes = radii;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    probes.push_back(0.5 * (radii[i] + radii[i + 1]));
  probes.push_back(radii.back() + 1.0);
  std::sort(probes.begin(), probes.end());

  SubmetryResult result;
  for (Index x = 0; x < n; ++x) {
    for (double r : probes) {
      std::vector<bool> image(m, false);
      for (Index y = 0; y < n; ++y)
        if (domain.dist(x, y) <= r) image[map[y]] = true;
      for (Index z = 0; z < m; ++z) {
        const bool in_ball = codomain.dist(map[x], z) <= r;
        if (in_ball != image[z]) {
          result.holds = false;
          result.witness = SubmetryWitness{x, r};
          return result;
        }
      }
    }
  }
  return result;
}

FoliationResult check_metric_foliation(const LeafPartition& part) {
  const auto& space = part.space();
  const auto& leaves = part.leaves();
  FoliationResult result;
  for (Index f = 0; f < leaves.size(); ++f)
    for (Index g = 0; g < leaves.size(); ++g) {
      const double dfg = part.leaf_distance(f, g);
      for (Index x : leaves[f]) {
        double dxg = std::numeric_limits<double>::infinity();
        for (Index y : leaves[g]) dxg = std::min(dxg, space.dist(x, y));
        if (dxg != dfg) {
          result.holds = false;
          result.witness = FoliationWitness{f, g, x};
          return result;
        }
      }
    }
  return result;
}

}  // namespace eqot
