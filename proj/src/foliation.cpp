#include <cmath>
#include <string>

#include "eqot/core_spaces.hpp"
#include "eqot/error.hpp"
#include "eqot/transport.hpp"

namespace eqot {

MmFoliationResult check_mm_foliation(const LeafPartition& part, double p,
                                     double tolerance) {
  const auto& space = part.space();
  const auto& leaves = part.leaves();
  std::vector<Vector> conditionals =
      part.conditionals() ? *part.conditionals()
                          : disintegrate(space, leaves).family;

  std::vector<Measure> measures;
  measures.reserve(leaves.size());
  for (Index f = 0; f < leaves.size(); ++f) {
    for (Index x = 0; x < space.size(); ++x)
      if (part.leaf_of(x) != f && conditionals[f](x) != 0.0)
        throw Error(ErrorCode::ConditionalNotSupported,
                    "conditional of leaf " + std::to_string(f) +
                        " charges point " + space.label(x));
    measures.emplace_back(conditionals[f]);
  }

  MmFoliationResult result;
  for (Index f = 0; f < leaves.size(); ++f)
    for (Index g = f + 1; g < leaves.size(); ++g) {
      const double w = wasserstein(space, measures[f], measures[g], p).value;
      const double deviation = std::abs(w - part.leaf_distance(f, g));
      if (deviation > result.max_deviation) {
        result.max_deviation = deviation;
        result.worst_f = f;
        result.worst_g = g;
      }
    }
  result.holds = result.max_deviation <= tolerance;
  return result;
}

}  // namespace eqot
