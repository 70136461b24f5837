#pragma once

#include <cstddef>
#include <span>

namespace covr {

struct TTestResult {
  double t = 0.0;
  double p = 1.0;          // two-sided
  bool infinite_t = false; // zero-variance differences with a nonzero mean
  std::size_t n = 0;

  bool significant(double level = 0.05) const { return p < level; }
};

/// Paired t-test on a - b. Two-sided p from the Student t CDF via the
/// regularized incomplete beta function:
///   p = I_{df / (df + t^2)}(df / 2, 1 / 2),  df = n - 1.
/// All-zero differences give t = 0, p = 1; constant nonzero differences give
/// p = 0 with infinite_t set. Throws DataError on length mismatch or n < 2.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace covr
