#include "splitfit/chi_squared.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "splitfit/error.hpp"

namespace splitfit {
namespace {

constexpr int kMaxTerms = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum * std::exp(log_prefactor(a, x));
  }
  throw NumericalError("incomplete gamma series did not converge");
}

double upper_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return std::exp(log_prefactor(a, x)) * h;
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

void check_args(double a, double x) {
  if (!(a > 0.0)) throw ValidationError("incomplete gamma needs a > 0");
  if (!(x >= 0.0)) throw ValidationError("incomplete gamma needs x >= 0");
}

}  // namespace

double gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? lower_series(a, x) : 1.0 - upper_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - lower_series(a, x) : upper_continued_fraction(a, x);
}

double chi2_cdf(double x, double df) { return x <= 0.0 ? 0.0 : gamma_p(0.5 * df, 0.5 * x); }

double chi2_sf(double x, double df) { return x <= 0.0 ? 1.0 : gamma_q(0.5 * df, 0.5 * x); }

double chi2_quantile(double prob, double df) {
  if (!(prob > 0.0 && prob < 1.0)) throw ValidationError("chi-squared quantile needs prob in (0, 1)");
  if (!(df > 0.0)) throw ValidationError("chi-squared quantile needs df > 0");

  // Bracket the root, then Newton steps safeguarded by bisection.
  double lo = 0.0;
  double hi = std::max(1.0, df);
  while (chi2_cdf(hi, df) < prob) {
    lo = hi;
    hi *= 2.0;
  }
  const double half = 0.5 * df;
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double cdf = chi2_cdf(x, df);
    const double diff = cdf - prob;
    if (diff > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double log_density = (half - 1.0) * std::log(x) - 0.5 * x - half * std::log(2.0) - std::lgamma(half);
    const double density = std::exp(log_density);
    double next = density > 0.0 ? x - diff / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x) || hi - lo <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

}  // namespace splitfit
