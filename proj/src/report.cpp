#include "eqot/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqot {

CheckResult CheckResult::equal(std::string name, double lhs, double rhs,
                               double tolerance) {
  double diff = std::abs(lhs - rhs);
  // Matching infinities agree; anything else non-finite fails.
  if (std::isinf(lhs) && lhs == rhs) diff = 0.0;
  if (std::isnan(diff)) diff = std::numeric_limits<double>::infinity();
  return {std::move(name), lhs, rhs, diff, tolerance, diff <= tolerance};
}

CheckResult CheckResult::at_least(std::string name, double lhs, double rhs,
                                  double tolerance) {
  double diff = std::max(0.0, rhs - lhs);
  if (lhs == rhs) diff = 0.0;
  if (std::isnan(diff)) diff = std::numeric_limits<double>::infinity();
  return {std::move(name), lhs, rhs, diff, tolerance, diff <= tolerance};
}

CheckResult CheckResult::holds(std::string name, bool ok) {
  return {std::move(name), ok ? 1.0 : 0.0, 1.0, ok ? 0.0 : 1.0, 0.0, ok};
}

bool RunReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

double summation_bound(std::size_t n, double abs_sum) {
  const double nu = static_cast<double>(n) * std::numeric_limits<double>::epsilon() / 2;
  return nu / (1.0 - nu) * abs_sum;
}

}  // namespace eqot
