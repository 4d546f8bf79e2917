#pragma once

#include <span>
#include <vector>

namespace splitfit {

/// Linear-interpolation sample quantile (type 7): level 0 is the minimum and
/// level 1 the maximum.
double quantile(std::vector<double> values, double level);
double quantile_sorted(std::span<const double> sorted, double level);

/// Monte Carlo standard error of the `level` quantile, estimated as half the
/// spread between the order statistics at level +- sqrt(level (1 - level) / N).
double quantile_se_sorted(std::span<const double> sorted, double level);

double mean(std::span<const double> values);
/// Unbiased sample variance.
double variance(std::span<const double> values);
/// Standard error of the sample variance, sqrt((m4 - s^4) / N).
double variance_se(std::span<const double> values);

}  // namespace splitfit
