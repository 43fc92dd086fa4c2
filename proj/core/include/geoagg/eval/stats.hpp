#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace geoagg {

struct WilcoxonResult {
  double p_value = 1.0;  // two-sided
  double w_plus = 0.0;   // rank sum of positive differences a - b
  std::size_t n = 0;     // nonzero differences
  bool exact = false;
};

// Paired signed-rank test. Zero differences are dropped and tied magnitudes
// share midranks. Exact null distribution for n <= 25, otherwise the normal
// approximation with tie-corrected variance. Throws InvalidInput on length
// mismatch or when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kWilcoxonExactMax = 25;

// min(1, m p) element-wise; m must be at least the number of p-values.
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

}  // namespace geoagg
