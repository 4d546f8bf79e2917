#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitfit/acf.hpp"
#include "splitfit/noise.hpp"

namespace splitfit {

/// Product of two centered Gaussian measures N(0, s_var) x N(0, t_var). Any
/// finite variances satisfy the integrability condition required by the ADCF
/// limit theory, so construction only checks positivity.
class WeightMeasure {
 public:
  static WeightMeasure gaussian_product(double s_var = 0.5, double t_var = 0.5);

  double s_var() const noexcept { return s_var_; }
  double t_var() const noexcept { return t_var_; }

  /// Short label such as "gaussian_product(0.5,0.5)".
  std::string label() const;

  friend bool operator==(const WeightMeasure&, const WeightMeasure&) = default;

 private:
  WeightMeasure(double s_var, double t_var) : s_var_(s_var), t_var_(t_var) {}
  double s_var_;
  double t_var_;
};

/// Fourier transform of the weight: exp(-s_var x^2 / 2 - t_var y^2 / 2).
double kernel_mu_hat(const WeightMeasure& w, double x, double y);

enum class AdcfMethod {
  factorized,  // O(m^2) per lag via row means of the kernel matrices
  literal,     // direct double, triple and quadruple sums; oracle use only
};

struct AdcfReport {
  std::vector<std::size_t> lags;  // 1..h_max
  std::vector<double> T;
  double T0 = 0.0;
  std::vector<double> R;          // T / T0
  std::size_t n_eff = 0;
};

/// T(h) for a single lag; 0 for constant input.
double adcf_statistic(std::span<const double> z, std::size_t h, const WeightMeasure& w,
                      AdcfMethod method = AdcfMethod::factorized);

/// T(0), ..., T(h_max) in one pass.
std::vector<double> adcf_statistics(std::span<const double> z, std::size_t h_max, const WeightMeasure& w,
                                    AdcfMethod method = AdcfMethod::factorized);

/// Throws DegenerateInputError when T(0) vanishes (constant residuals).
AdcfReport adcf(std::span<const double> z, std::size_t h_max, const WeightMeasure& w,
                AdcfMethod method = AdcfMethod::factorized);

/// Critical values for Gaussian noise with the N(0, 0.5)^2 weight at h = 2, 5, 8.
std::optional<double> default_adcf_critical_value(std::size_t h, const WeightMeasure& w);

/// n_eff * sum_{k<=h} R(k) against `critical_value`.
TestOutcome q_adcf(const AdcfReport& report, std::size_t h, double critical_value);

/// As above with the default critical value; throws ValidationError when none
/// is available and the quantile has to be calibrated first.
TestOutcome q_adcf(const AdcfReport& report, std::size_t h, const WeightMeasure& w);

struct AdcfQuantile {
  std::size_t h = 0;
  double quantile = 0.0;
  double quantile_se = 0.0;
};

struct AdcfCalibration {
  NoiseSpec noise = NoiseSpec::gaussian();
  WeightMeasure weight = WeightMeasure::gaussian_product();
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  bool sum_form = false;  // n sum_{k<=h} R(k) rather than n R(h)
  std::vector<AdcfQuantile> quantiles;
};

/// Empirical `level` quantiles over `reps` iid noise vectors of length n;
/// replication r uses seed stream seed ^ r. Requires reps >= 200.
AdcfCalibration calibrate_adcf_quantiles(const NoiseSpec& noise, std::size_t n, const std::vector<std::size_t>& hs,
                                         bool sum_form, const WeightMeasure& w, std::size_t reps,
                                         std::uint64_t seed, double level, unsigned workers = 1);

double calibrate_adcf_quantile(const NoiseSpec& noise, std::size_t n, std::size_t h, bool sum_form,
                               const WeightMeasure& w, std::size_t reps, std::uint64_t seed, double level,
                               unsigned workers = 1);

void to_json(nlohmann::json& j, const WeightMeasure& w);
WeightMeasure weight_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const AdcfReport& report);
void to_json(nlohmann::json& j, const AdcfCalibration& calibration);

/// CSV with header lag,T,R,n_times_R; lag 0 is included.
void write_adcf_csv(std::ostream& out, const AdcfReport& report);

}  // namespace splitfit
