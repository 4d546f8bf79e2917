#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitfit/splitting.hpp"

namespace splitfit {

enum class AcfKind { plain, squared };

struct AcfReport {
  AcfKind kind = AcfKind::plain;
  std::vector<std::size_t> lags;  // 1..h_max
  std::vector<double> rho;
  std::size_t n_eff = 0;          // number of residuals, l_n
  double bound_iid = 0.0;         // 1.96 / sqrt(l_n)
  /// Model-adjusted standard deviation per lag, when known.
  std::optional<std::vector<double>> sigma_h;
  /// Some |rho| > 1 (possible for the mean-corrected squared ACF in small
  /// samples). Values are never clamped.
  bool exceeds_unit = false;
  /// Sample-splitting regime the residuals came from, when known.
  std::optional<SplitCoefficients> regime;
};

/// sum_{j} z_j z_{j+h} / sum_j z_j^2, without mean correction.
AcfReport residual_acf(std::span<const double> z, std::size_t h_max);

/// Mean-corrected ACF of z_j^2:
/// [sum z_j^2 z_{j+h}^2 - (sum z_j^2)^2 / l] / [sum z_j^4 - (sum z_j^2)^2 / l].
AcfReport squared_residual_acf(std::span<const double> z, std::size_t h_max);

/// Asymptotic variance of sqrt(l_n) * rho(h) for fitted AR(1) residuals:
/// 1 + (k_ra - 2 k_ov) beta^{2(h-1)} (1 - beta^2).
double ar1_acf_variance(double beta, std::size_t h, double k_ra, double k_ov);

/// Asymptotic covariance between lags j and k:
/// 1{j = k} + (k_ra - 2 k_ov) beta^{j+k-2} (1 - beta^2).
double ar1_acf_covariance(double beta, std::size_t j, std::size_t k, double k_ra, double k_ov);

struct TestOutcome {
  std::string name;  // "Q_ACF", "Q_ACF2", "Q_LB", "Q_ADCF"
  std::size_t h = 0;
  double statistic = 0.0;
  /// Chi-squared degrees of freedom; NaN for simulation-calibrated tests.
  double df = 0.0;
  double critical_value = 0.0;
  std::optional<double> p_value;
  bool reject = false;
  /// Whether the residual regime satisfies k_ra = 2 k_ov (to 1e-2), when known.
  std::optional<bool> iid_calibrated;
};

/// n_eff * sum_{k<=h} rho(k)^2 against the chi-squared_h quantile.
TestOutcome q_acf(const AcfReport& report, std::size_t h, double level = 0.95);

/// As q_acf for a squared-residual ACF report.
TestOutcome q_acf2(const AcfReport& report, std::size_t h, double level = 0.95);

/// n (n + 2) sum_{k<=h} rho(k)^2 / (n - k) against chi-squared with
/// h - df_adjust degrees of freedom.
TestOutcome q_ljung_box(const AcfReport& report, std::size_t h, std::size_t df_adjust = 1, double level = 0.95);

/// One-sample Kolmogorov-Smirnov distance between a sample and chi-squared_df.
double ks_distance_chi2(std::vector<double> sample, double df);

void to_json(nlohmann::json& j, const AcfReport& report);
void to_json(nlohmann::json& j, const TestOutcome& outcome);

/// Tidy CSV with header lag,rho,bound,sigma_h (sigma_h empty when unknown).
void write_acf_csv(std::ostream& out, const AcfReport& report);

}  // namespace splitfit
