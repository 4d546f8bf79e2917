#include "splitfit/acf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splitfit/chi_squared.hpp"
#include "splitfit/error.hpp"
#include "splitfit/series_io.hpp"

namespace splitfit {
namespace {

void check_lags(std::span<const double> z, std::size_t h_max) {
  if (h_max == 0) throw ValidationError("ACF needs h_max >= 1");
  if (h_max >= z.size()) throw ValidationError("ACF needs h_max < number of residuals");
}

AcfReport make_report(AcfKind kind, std::size_t n, std::size_t h_max) {
  AcfReport report;
  report.kind = kind;
  report.n_eff = n;
  report.bound_iid = 1.96 / std::sqrt(static_cast<double>(n));
  report.lags.resize(h_max);
  for (std::size_t h = 0; h < h_max; ++h) report.lags[h] = h + 1;
  report.rho.resize(h_max);
  return report;
}

TestOutcome chi2_portmanteau(const AcfReport& report, std::string name, std::size_t h, double statistic, double df,
                             double level) {
  TestOutcome out;
  out.name = std::move(name);
  out.h = h;
  out.statistic = statistic;
  out.df = df;
  out.critical_value = chi2_quantile(level, df);
  out.p_value = chi2_sf(statistic, df);
  out.reject = statistic > out.critical_value;
  if (report.regime) out.iid_calibrated = std::abs(report.regime->k_ra - 2.0 * report.regime->k_ov) < 1e-2;
  return out;
}

void check_h(const AcfReport& report, std::size_t h) {
  if (h == 0 || h > report.rho.size()) {
    throw ValidationError("test lag h=" + std::to_string(h) + " exceeds the " + std::to_string(report.rho.size()) +
                          " lags in the report");
  }
}

}  // namespace

AcfReport residual_acf(std::span<const double> z, std::size_t h_max) {
  check_lags(z, h_max);
  double denom = 0.0;
  for (double v : z) denom += v * v;
  if (!(denom > 0.0)) throw DegenerateInputError("residual ACF of an all-zero residual vector");
  auto report = make_report(AcfKind::plain, z.size(), h_max);
  for (std::size_t h = 1; h <= h_max; ++h) {
    double num = 0.0;
    for (std::size_t j = 0; j + h < z.size(); ++j) num += z[j] * z[j + h];
    report.rho[h - 1] = num / denom;
  }
  return report;
}

AcfReport squared_residual_acf(std::span<const double> z, std::size_t h_max) {
  check_lags(z, h_max);
  const double n = static_cast<double>(z.size());
  double s2 = 0.0;
  double s4 = 0.0;
  for (double v : z) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double correction = s2 * s2 / n;
  const double denom = s4 - correction;
  if (!(std::abs(denom) > 1e-300) || !(s2 > 0.0)) {
    throw DegenerateInputError("squared residual ACF is undefined for residuals of constant magnitude");
  }
  auto report = make_report(AcfKind::squared, z.size(), h_max);
  for (std::size_t h = 1; h <= h_max; ++h) {
    double num = 0.0;
    for (std::size_t j = 0; j + h < z.size(); ++j) num += z[j] * z[j] * z[j + h] * z[j + h];
    report.rho[h - 1] = (num - correction) / denom;
  }
  report.exceeds_unit = std::any_of(report.rho.begin(), report.rho.end(), [](double r) { return std::abs(r) > 1.0; });
  return report;
}

double ar1_acf_variance(double beta, std::size_t h, double k_ra, double k_ov) {
  return ar1_acf_covariance(beta, h, h, k_ra, k_ov);
}

double ar1_acf_covariance(double beta, std::size_t j, std::size_t k, double k_ra, double k_ov) {
  if (!(std::abs(beta) < 1.0)) throw ValidationError("AR(1) coefficient must satisfy |beta| < 1");
  if (j == 0 || k == 0) throw ValidationError("ACF lags start at 1");
  const double power = std::pow(beta, static_cast<double>(j + k - 2));
  return (j == k ? 1.0 : 0.0) + (k_ra - 2.0 * k_ov) * power * (1.0 - beta * beta);
}

TestOutcome q_acf(const AcfReport& report, std::size_t h, double level) {
  if (report.kind != AcfKind::plain) throw ValidationError("Q_ACF needs a plain residual ACF report");
  check_h(report, h);
  double sum = 0.0;
  for (std::size_t k = 0; k < h; ++k) sum += report.rho[k] * report.rho[k];
  return chi2_portmanteau(report, "Q_ACF", h, static_cast<double>(report.n_eff) * sum, static_cast<double>(h), level);
}

TestOutcome q_acf2(const AcfReport& report, std::size_t h, double level) {
  if (report.kind != AcfKind::squared) throw ValidationError("Q_ACF2 needs a squared residual ACF report");
  check_h(report, h);
  double sum = 0.0;
  for (std::size_t k = 0; k < h; ++k) sum += report.rho[k] * report.rho[k];
  return chi2_portmanteau(report, "Q_ACF2", h, static_cast<double>(report.n_eff) * sum, static_cast<double>(h), level);
}

TestOutcome q_ljung_box(const AcfReport& report, std::size_t h, std::size_t df_adjust, double level) {
  if (report.kind != AcfKind::plain) throw ValidationError("Q_LB needs a plain residual ACF report");
  check_h(report, h);
  if (h <= df_adjust) throw ValidationError("Ljung-Box needs h > df adjustment (degrees of freedom h - adjust <= 0)");
  const double n = static_cast<double>(report.n_eff);
  double sum = 0.0;
  for (std::size_t k = 1; k <= h; ++k) sum += report.rho[k - 1] * report.rho[k - 1] / (n - static_cast<double>(k));
  return chi2_portmanteau(report, "Q_LB", h, n * (n + 2.0) * sum, static_cast<double>(h - df_adjust), level);
}

double ks_distance_chi2(std::vector<double> sample, double df) {
  if (sample.empty()) throw ValidationError("KS distance of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = chi2_cdf(sample[i], df);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

void to_json(nlohmann::json& j, const AcfReport& report) {
  j = nlohmann::json{{"kind", report.kind == AcfKind::plain ? "plain" : "squared"},
                     {"lags", report.lags},
                     {"rho", report.rho},
                     {"n_eff", report.n_eff},
                     {"bound_iid", report.bound_iid},
                     {"exceeds_unit", report.exceeds_unit}};
  if (report.sigma_h) j["sigma_h"] = *report.sigma_h;
  if (report.regime) j["regime"] = {{"k_ra", report.regime->k_ra}, {"k_ov", report.regime->k_ov}};
}

void to_json(nlohmann::json& j, const TestOutcome& outcome) {
  j = nlohmann::json{{"test", outcome.name},
                     {"h", outcome.h},
                     {"statistic", outcome.statistic},
                     {"critical_value", outcome.critical_value},
                     {"reject_5pct", outcome.reject}};
  j["df"] = std::isfinite(outcome.df) ? nlohmann::json(outcome.df) : nlohmann::json(nullptr);
  j["p_value"] = outcome.p_value ? nlohmann::json(*outcome.p_value) : nlohmann::json(nullptr);
  if (outcome.iid_calibrated) j["iid_calibrated"] = *outcome.iid_calibrated;
}

void write_acf_csv(std::ostream& out, const AcfReport& report) {
  out << "lag,rho,bound,sigma_h\n";
  for (std::size_t i = 0; i < report.lags.size(); ++i) {
    out << report.lags[i] << ',' << format_double(report.rho[i]) << ',' << format_double(report.bound_iid) << ',';
    if (report.sigma_h) out << format_double((*report.sigma_h)[i]);
    out << '\n';
  }
}

}  // namespace splitfit
