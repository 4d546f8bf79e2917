#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "splitfit/models.hpp"
#include "splitfit/optimize.hpp"

namespace splitfit {

struct FitResult {
  ModelParams estimate;
  /// Innovation variance estimate (ARMA fits); NaN for GARCH.
  double sigma2 = 0.0;
  double loglik = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  /// Estimate sits on (or numerically at) the edge of the parameter space.
  bool boundary = false;
  /// Log-likelihood after each accepted optimizer step.
  std::vector<double> loglik_trace;
  std::optional<std::vector<double>> stderr_proxy;

  const ArmaParams& arma() const { return std::get<ArmaParams>(estimate); }
  const GarchParams& garch() const { return std::get<GarchParams>(estimate); }
};

void to_json(nlohmann::json& j, const FitResult& fit);

/// Ordinary least squares of X_j on (X_{j-1}, ..., X_{j-p}) without
/// intercept, over j = p+1..n. Requires n >= 10 p.
FitResult fit_ar_ls(std::span<const double> x, std::size_t p);

/// Exact Gaussian log-likelihood of a zero-mean ARMA series with the
/// innovation variance profiled out, evaluated with the innovations
/// algorithm.
struct ArmaLikelihood {
  double loglik;
  double sigma2;
};
ArmaLikelihood arma_gaussian_loglik(std::span<const double> x, const ArmaParams& params);

/// Two-stage Hannan-Rissanen estimate (long autoregression, then regression
/// on lagged data and lagged proxy residuals). Falls back to zeros when a
/// stage is singular or the result is not causal and invertible.
ArmaParams hannan_rissanen(std::span<const double> x, std::size_t p, std::size_t q);

/// Gaussian pseudo maximum likelihood for ARMA(p, q). The search runs over
/// partial autocorrelations (tanh-mapped) of phi(z) and theta(z), so every
/// iterate is causal and invertible.
FitResult fit_arma_pmle(std::span<const double> x, std::size_t p, std::size_t q,
                        std::optional<ArmaParams> init = std::nullopt, const OptimOptions& options = {});

/// Compact GARCH parameter space: every coordinate in [lower, upper] and
/// sum beta <= rho0.
struct GarchSpace {
  double lower = 1e-6;
  double upper = 10.0;
  double rho0 = 0.999;
};

/// sum_j [-1/2 log sigma_j^2 - X_j^2 / (2 sigma_j^2)] with the truncated
/// conditional variances.
double garch_quasi_loglik(std::span<const double> x, const GarchParams& params);

/// Gradient of garch_quasi_loglik with respect to (omega, alpha, beta).
std::vector<double> garch_quasi_loglik_gradient(std::span<const double> x, const GarchParams& params);

/// Quasi maximum likelihood for GARCH(p, q) constrained to `space`.
FitResult fit_garch_qmle(std::span<const double> x, std::size_t p, std::size_t q, const GarchSpace& space = {},
                         const OptimOptions& options = {});

}  // namespace splitfit
