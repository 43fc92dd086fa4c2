#include "geoagg/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geoagg/errors.hpp"

namespace geoagg {

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("wilcoxon: paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (std::isnan(diff)) throw InvalidInput("wilcoxon: NaN difference");
    if (diff != 0.0) d.push_back(diff);
  }
  if (d.empty()) throw InvalidInput("wilcoxon: all differences are zero, test undefined");
  const std::size_t n = d.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });

  // Doubled midranks keep everything integral.
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const long r2 = static_cast<long>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  long w2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) w2 += rank2[i];

  WilcoxonResult res;
  res.n = n;
  res.w_plus = static_cast<double>(w2) / 2.0;

  if (n <= kWilcoxonExactMax) {
    res.exact = true;
    const long total = std::accumulate(rank2.begin(), rank2.end(), 0L);
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (long r : rank2) {
      for (long s = reach; s >= 0; --s)
        if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
      reach += r;
    }
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total; ++s) {
      if (s <= w2) lower += count[static_cast<std::size_t>(s)];
      if (s >= w2) upper += count[static_cast<std::size_t>(s)];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    return res;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) {
    res.p_value = 1.0;
    return res;
  }
  const double z = (res.w_plus - mean) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  return res;
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m < p_values.size()) throw InvalidInput("bonferroni: m is smaller than the number of tests");
  std::vector<double> out(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0)) throw InvalidInput("bonferroni: p-value outside [0, 1]");
    out[i] = std::min(1.0, static_cast<double>(m) * p_values[i]);
  }
  return out;
}

}  // namespace geoagg
