#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "splitfit/noise.hpp"

namespace splitfit {

/// Zero-mean ARMA(p, q):  X_j = sum phi_k X_{j-k} + Z_j + sum theta_l Z_{j-l}.
/// Construction rejects non-causal or non-invertible coefficient sets.
class ArmaParams {
 public:
  ArmaParams() = default;
  ArmaParams(std::vector<double> phi, std::vector<double> theta);

  const std::vector<double>& phi() const noexcept { return phi_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  std::size_t p() const noexcept { return phi_.size(); }
  std::size_t q() const noexcept { return theta_.size(); }

  /// (phi_1..phi_p, theta_1..theta_q).
  std::vector<double> flat() const;

  /// Smallest modulus among the roots of phi(z) and theta(z).
  double min_root_modulus() const;

  friend bool operator==(const ArmaParams&, const ArmaParams&) = default;

 private:
  std::vector<double> phi_;
  std::vector<double> theta_;
};

/// GARCH(p, q):  X_j = sigma_j Z_j,
///   sigma_j^2 = omega + sum alpha_k X_{j-k}^2 + sum beta_l sigma_{j-l}^2.
/// Requires omega > 0, alpha, beta >= 0 and sum beta < 1. Covariance
/// stationarity (sum alpha + sum beta < 1) is only required for simulation.
class GarchParams {
 public:
  GarchParams() = default;
  GarchParams(double omega, std::vector<double> alpha, std::vector<double> beta);

  double omega() const noexcept { return omega_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  const std::vector<double>& beta() const noexcept { return beta_; }
  std::size_t p() const noexcept { return alpha_.size(); }
  std::size_t q() const noexcept { return beta_.size(); }

  double persistence() const noexcept;  // sum alpha + sum beta
  double beta_sum() const noexcept;
  bool is_stationary() const noexcept { return persistence() < 1.0; }

  /// (omega, alpha_1..alpha_p, beta_1..beta_q).
  std::vector<double> flat() const;

  friend bool operator==(const GarchParams&, const GarchParams&) = default;

 private:
  double omega_ = 1.0;
  std::vector<double> alpha_;
  std::vector<double> beta_;
};

/// AR(1) driven by GARCH(1, 1) noise with unit intercept:
///   X_j = phi X_{j-1} + Z_j,  Z_j = sigma_j eps_j,
///   sigma_j^2 = 1 + alpha Z_{j-1}^2 + beta sigma_{j-1}^2.
class ArGarchParams {
 public:
  ArGarchParams() = default;
  ArGarchParams(double phi, double alpha, double beta);

  double phi() const noexcept { return phi_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  friend bool operator==(const ArGarchParams&, const ArGarchParams&) = default;

 private:
  double phi_ = 0.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

using ModelParams = std::variant<ArmaParams, GarchParams, ArGarchParams>;

/// What the simulator knew: parameters, noise, and the realized innovations
/// (and conditional variances for GARCH-type models) aligned with x.
struct Truth {
  ModelParams params;
  NoiseSpec noise = NoiseSpec::gaussian();
  std::vector<double> innovations;
  std::vector<double> sigma2;
};

struct SeriesSample {
  std::vector<double> x;
  std::optional<Truth> truth;
};

/// 1000 + ceil(10 / (1 - r)) where r is the AR spectral radius (ARMA) or the
/// persistence (GARCH).
std::size_t default_burn_in(const ArmaParams& params);
std::size_t default_burn_in(const GarchParams& params);

SeriesSample simulate_arma(const ArmaParams& params, const NoiseSpec& noise, std::size_t n,
                           std::optional<std::size_t> burn_in, std::uint64_t seed);

/// First K+1 coefficients of phi(z) / theta(z) (pi_0 = 1).
std::vector<double> pi_coefficients(const ArmaParams& params, std::size_t K);

/// Truncated residuals Z_j = sum_{k<j} pi_k X_{j-k}, j = 1..n, i.e. the
/// inversion recursion with zero presample values. Returned 0-based.
std::vector<double> arma_residuals_truncated(const ArmaParams& params, std::span<const double> x);

/// Residuals for 0-based times [first, last); the history before `first` is
/// still used.
std::vector<double> arma_residuals_truncated(const ArmaParams& params, std::span<const double> x, std::size_t first,
                                             std::size_t last);

/// Requires unit-variance noise and a stationary parameter set.
SeriesSample simulate_garch(const GarchParams& params, const NoiseSpec& noise, std::size_t n,
                            std::optional<std::size_t> burn_in, std::uint64_t seed);

/// ARCH(infinity) coefficients c_0..c_K:  c_0 = omega / (1 - sum beta) and
/// sum_{k>=1} c_k z^k = alpha(z) / (1 - beta(z)).
std::vector<double> arch_inf_coefficients(const GarchParams& params, std::size_t K);

/// Truncated conditional variances sigma_j^2 = c_0 + sum_{k=1}^{j-1} c_k X_{j-k}^2,
/// evaluated by the variance recursion with presample X^2 = 0 and presample
/// sigma^2 = c_0.
std::vector<double> garch_cond_var_truncated(const GarchParams& params, std::span<const double> x);

/// The same quantity summed directly from the ARCH(infinity) expansion,
/// keeping at most K lagged terms (K = 0 means all). O(nK); a cross-check.
std::vector<double> garch_cond_var_expansion(const GarchParams& params, std::span<const double> x, std::size_t K = 0);

/// X_j / sigma_j with the truncated sigma_j.
std::vector<double> garch_residuals(const GarchParams& params, std::span<const double> x);
std::vector<double> garch_residuals(const GarchParams& params, std::span<const double> x, std::size_t first,
                                    std::size_t last);

/// Unit-variance noise; sigma_1^2 starts at the stationary mean 1 / (1 - alpha - beta).
SeriesSample simulate_ar_garch(const ArGarchParams& params, const NoiseSpec& noise, std::size_t n,
                               std::size_t burn_in, std::uint64_t seed);

void to_json(nlohmann::json& j, const ModelParams& params);
ModelParams model_params_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const Truth& truth);

}  // namespace splitfit
