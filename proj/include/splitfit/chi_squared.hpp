#pragma once

namespace splitfit {

/// Regularized lower incomplete gamma P(a, x), series expansion for x < a + 1
/// and a Lentz continued fraction for the complement otherwise.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// without cancellation in the upper tail.
double gamma_q(double a, double x);

double chi2_cdf(double x, double df);
/// Upper tail P(chi2_df > x).
double chi2_sf(double x, double df);
/// Inverse of chi2_cdf for prob in (0, 1).
double chi2_quantile(double prob, double df);

}  // namespace splitfit
