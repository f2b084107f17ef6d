#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eqot {

/// One numeric verification: pass == (diff <= tolerance).
struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double diff = 0.0;
  double tolerance = 0.0;
  bool pass = true;

  /// Two-sided: diff = |lhs - rhs|.
  static CheckResult equal(std::string name, double lhs, double rhs,
                           double tolerance);
  /// One-sided lhs >= rhs: diff = max(0, rhs - lhs).
  static CheckResult at_least(std::string name, double lhs, double rhs,
                              double tolerance);
  /// A boolean predicate recorded as lhs = 1/0 against rhs = 1.
  static CheckResult holds(std::string name, bool ok);
};

struct RunReport {
  std::string command;
  std::vector<std::pair<std::string, std::string>> input_digests;
  std::vector<CheckResult> checks;
  std::optional<double> wall_time_seconds;

  bool all_passed() const;
  void add(CheckResult check) { checks.push_back(std::move(check)); }
  void add(const std::vector<CheckResult>& more) {
    checks.insert(checks.end(), more.begin(), more.end());
  }
};

/// gamma_n * abs_sum with gamma_n = n u / (1 - n u): the worst-case rounding
/// error of a recursive floating-point sum of n terms whose absolute values
/// add up to abs_sum.
double summation_bound(std::size_t n, double abs_sum);

}  // namespace eqot
