#include "splitfit/summary_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splitfit/error.hpp"

namespace splitfit {

double quantile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(level >= 0.0 && level <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, level);
}

double quantile_se_sorted(std::span<const double> sorted, double level) {
  if (sorted.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double spread = std::sqrt(level * (1.0 - level) / static_cast<double>(sorted.size()));
  const double upper = quantile_sorted(sorted, std::min(1.0, level + spread));
  const double lower = quantile_sorted(sorted, std::max(0.0, level - spread));
  return 0.5 * (upper - lower);
}

double mean(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

double variance_se(std::span<const double> values) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(values);
  const double n = static_cast<double>(values.size());
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
}

}  // namespace splitfit
