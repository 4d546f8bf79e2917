#include "splitfit/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "splitfit/error.hpp"
#include "splitfit/polynomial.hpp"

namespace splitfit {
namespace {

constexpr double kRootMargin = 1e-8;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> negated(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x = -x;
  return out;
}

std::size_t burn_in_for_radius(double radius) {
  return 1000 + static_cast<std::size_t>(std::ceil(10.0 / (1.0 - std::min(radius, 0.999999))));
}

std::vector<double> slice(const std::vector<double>& full, std::size_t first, std::size_t last) {
  if (first > last || last > full.size()) throw ValidationError("residual range outside the series");
  return {full.begin() + static_cast<std::ptrdiff_t>(first), full.begin() + static_cast<std::ptrdiff_t>(last)};
}

}  // namespace

ArmaParams::ArmaParams(std::vector<double> phi, std::vector<double> theta)
    : phi_(std::move(phi)), theta_(std::move(theta)) {
  if (!all_finite(phi_) || !all_finite(theta_)) throw ValidationError("ARMA coefficients must be finite");
  const double ar_root = splitfit::min_root_modulus(negated(phi_));
  if (!(ar_root > 1.0 + kRootMargin)) {
    std::ostringstream msg;
    msg << "causality violated: AR polynomial has a root of modulus " << ar_root << " (must exceed 1)";
    throw ValidationError(msg.str());
  }
  const double ma_root = splitfit::min_root_modulus(theta_);
  if (!(ma_root > 1.0 + kRootMargin)) {
    std::ostringstream msg;
    msg << "invertibility violated: MA polynomial has a root of modulus " << ma_root << " (must exceed 1)";
    throw ValidationError(msg.str());
  }
}

std::vector<double> ArmaParams::flat() const {
  std::vector<double> out = phi_;
  out.insert(out.end(), theta_.begin(), theta_.end());
  return out;
}

double ArmaParams::min_root_modulus() const {
  return std::min(splitfit::min_root_modulus(negated(phi_)), splitfit::min_root_modulus(theta_));
}

GarchParams::GarchParams(double omega, std::vector<double> alpha, std::vector<double> beta)
    : omega_(omega), alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (!(omega_ > 0.0) || !std::isfinite(omega_)) throw ValidationError("GARCH omega must be positive");
  for (double a : alpha_) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("GARCH alpha coefficients must be nonnegative");
  }
  for (double b : beta_) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ValidationError("GARCH beta coefficients must be nonnegative");
  }
  if (!(beta_sum() < 1.0)) throw ValidationError("GARCH beta coefficients must sum to less than 1");
}

double GarchParams::beta_sum() const noexcept { return std::accumulate(beta_.begin(), beta_.end(), 0.0); }

double GarchParams::persistence() const noexcept {
  return std::accumulate(alpha_.begin(), alpha_.end(), 0.0) + beta_sum();
}

std::vector<double> GarchParams::flat() const {
  std::vector<double> out{omega_};
  out.insert(out.end(), alpha_.begin(), alpha_.end());
  out.insert(out.end(), beta_.begin(), beta_.end());
  return out;
}

ArGarchParams::ArGarchParams(double phi, double alpha, double beta) : phi_(phi), alpha_(alpha), beta_(beta) {
  if (!(std::abs(phi) < 1.0)) throw ValidationError("causality violated: |phi| must be below 1");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ValidationError("GARCH noise coefficients must be nonnegative");
  if (!(alpha + beta < 1.0)) throw ValidationError("stationarity violated: alpha + beta must be below 1");
}

std::size_t default_burn_in(const ArmaParams& params) {
  const double root = splitfit::min_root_modulus(negated(params.phi()));
  return burn_in_for_radius(std::isinf(root) ? 0.0 : 1.0 / root);
}

std::size_t default_burn_in(const GarchParams& params) { return burn_in_for_radius(params.persistence()); }

SeriesSample simulate_arma(const ArmaParams& params, const NoiseSpec& noise, std::size_t n,
                           std::optional<std::size_t> burn_in, std::uint64_t seed) {
  const std::size_t burn = burn_in.value_or(default_burn_in(params));
  const std::size_t total = burn + n;
  const auto& phi = params.phi();
  const auto& theta = params.theta();
  Rng rng(seed);
  std::vector<double> x(total, 0.0);
  std::vector<double> z(total, 0.0);
  for (std::size_t j = 0; j < total; ++j) {
    z[j] = noise.draw(rng);
    double value = z[j];
    for (std::size_t k = 1; k <= phi.size() && k <= j; ++k) value += phi[k - 1] * x[j - k];
    for (std::size_t l = 1; l <= theta.size() && l <= j; ++l) value += theta[l - 1] * z[j - l];
    x[j] = value;
  }
  SeriesSample out;
  out.x.assign(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
  out.truth = Truth{params, noise, std::vector<double>(z.begin() + static_cast<std::ptrdiff_t>(burn), z.end()), {}};
  return out;
}

std::vector<double> pi_coefficients(const ArmaParams& params, std::size_t K) {
  const auto& phi = params.phi();
  const auto& theta = params.theta();
  std::vector<double> pi(K + 1, 0.0);
  for (std::size_t j = 0; j <= K; ++j) {
    double value = j == 0 ? 1.0 : (j <= phi.size() ? -phi[j - 1] : 0.0);
    for (std::size_t l = 1; l <= theta.size() && l <= j; ++l) value -= theta[l - 1] * pi[j - l];
    pi[j] = value;
  }
  return pi;
}

std::vector<double> arma_residuals_truncated(const ArmaParams& params, std::span<const double> x) {
  const auto& phi = params.phi();
  const auto& theta = params.theta();
  std::vector<double> z(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double value = x[j];
    for (std::size_t k = 1; k <= phi.size() && k <= j; ++k) value -= phi[k - 1] * x[j - k];
    for (std::size_t l = 1; l <= theta.size() && l <= j; ++l) value -= theta[l - 1] * z[j - l];
    z[j] = value;
  }
  return z;
}

std::vector<double> arma_residuals_truncated(const ArmaParams& params, std::span<const double> x, std::size_t first,
                                             std::size_t last) {
  if (last > x.size()) throw ValidationError("residual range outside the series");
  return slice(arma_residuals_truncated(params, x.first(last)), first, last);
}

SeriesSample simulate_garch(const GarchParams& params, const NoiseSpec& noise, std::size_t n,
                            std::optional<std::size_t> burn_in, std::uint64_t seed) {
  if (std::abs(noise.variance() - 1.0) > 1e-12) throw ValidationError("GARCH innovations must have unit variance");
  if (!params.is_stationary()) throw ValidationError("stationarity violated: sum(alpha) + sum(beta) must be below 1");
  const std::size_t burn = burn_in.value_or(default_burn_in(params));
  const std::size_t total = burn + n;
  const auto& alpha = params.alpha();
  const auto& beta = params.beta();
  const double stationary = params.omega() / (1.0 - params.persistence());

  Rng rng(seed);
  std::vector<double> x(total, 0.0);
  std::vector<double> s2(total, 0.0);
  std::vector<double> z(total, 0.0);
  for (std::size_t j = 0; j < total; ++j) {
    double var = params.omega();
    for (std::size_t k = 1; k <= alpha.size(); ++k) var += alpha[k - 1] * (k <= j ? x[j - k] * x[j - k] : stationary);
    for (std::size_t l = 1; l <= beta.size(); ++l) var += beta[l - 1] * (l <= j ? s2[j - l] : stationary);
    s2[j] = var;
    z[j] = noise.draw(rng);
    x[j] = std::sqrt(var) * z[j];
  }
  const auto skip = static_cast<std::ptrdiff_t>(burn);
  SeriesSample out;
  out.x.assign(x.begin() + skip, x.end());
  out.truth = Truth{params, noise, std::vector<double>(z.begin() + skip, z.end()),
                    std::vector<double>(s2.begin() + skip, s2.end())};
  return out;
}

std::vector<double> arch_inf_coefficients(const GarchParams& params, std::size_t K) {
  const auto& alpha = params.alpha();
  const auto& beta = params.beta();
  std::vector<double> c(K + 1, 0.0);
  c[0] = params.omega() / (1.0 - params.beta_sum());
  for (std::size_t k = 1; k <= K; ++k) {
    double value = k <= alpha.size() ? alpha[k - 1] : 0.0;
    for (std::size_t l = 1; l <= beta.size() && l < k; ++l) value += beta[l - 1] * c[k - l];
    c[k] = value;
  }
  return c;
}

std::vector<double> garch_cond_var_truncated(const GarchParams& params, std::span<const double> x) {
  const auto& alpha = params.alpha();
  const auto& beta = params.beta();
  const double presample = params.omega() / (1.0 - params.beta_sum());
  std::vector<double> s2(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double var = params.omega();
    for (std::size_t k = 1; k <= alpha.size() && k <= j; ++k) var += alpha[k - 1] * x[j - k] * x[j - k];
    for (std::size_t l = 1; l <= beta.size(); ++l) var += beta[l - 1] * (l <= j ? s2[j - l] : presample);
    s2[j] = var;
  }
  return s2;
}

std::vector<double> garch_cond_var_expansion(const GarchParams& params, std::span<const double> x, std::size_t K) {
  const std::size_t terms = K == 0 ? (x.empty() ? 0 : x.size() - 1) : K;
  const auto c = arch_inf_coefficients(params, terms);
  std::vector<double> s2(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double var = c[0];
    for (std::size_t k = 1; k <= terms && k <= j; ++k) var += c[k] * x[j - k] * x[j - k];
    s2[j] = var;
  }
  return s2;
}

std::vector<double> garch_residuals(const GarchParams& params, std::span<const double> x) {
  const auto s2 = garch_cond_var_truncated(params, x);
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = x[j] / std::sqrt(s2[j]);
  return z;
}

std::vector<double> garch_residuals(const GarchParams& params, std::span<const double> x, std::size_t first,
                                    std::size_t last) {
  if (last > x.size()) throw ValidationError("residual range outside the series");
  return slice(garch_residuals(params, x.first(last)), first, last);
}

SeriesSample simulate_ar_garch(const ArGarchParams& params, const NoiseSpec& noise, std::size_t n,
                               std::size_t burn_in, std::uint64_t seed) {
  if (std::abs(noise.variance() - 1.0) > 1e-12) throw ValidationError("GARCH innovations must have unit variance");
  const std::size_t total = burn_in + n;
  Rng rng(seed);
  std::vector<double> x(total, 0.0);
  std::vector<double> z(total, 0.0);
  std::vector<double> s2(total, 0.0);
  for (std::size_t j = 0; j < total; ++j) {
    s2[j] = j == 0 ? 1.0 / (1.0 - params.alpha() - params.beta())
                   : 1.0 + params.alpha() * z[j - 1] * z[j - 1] + params.beta() * s2[j - 1];
    z[j] = std::sqrt(s2[j]) * noise.draw(rng);
    x[j] = (j == 0 ? 0.0 : params.phi() * x[j - 1]) + z[j];
  }
  const auto skip = static_cast<std::ptrdiff_t>(burn_in);
  SeriesSample out;
  out.x.assign(x.begin() + skip, x.end());
  out.truth = Truth{params, noise, std::vector<double>(z.begin() + skip, z.end()),
                    std::vector<double>(s2.begin() + skip, s2.end())};
  return out;
}

void to_json(nlohmann::json& j, const ModelParams& params) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArmaParams>) {
          j = {{"model", "arma"}, {"phi", p.phi()}, {"theta", p.theta()}};
        } else if constexpr (std::is_same_v<T, GarchParams>) {
          j = {{"model", "garch"}, {"omega", p.omega()}, {"alpha", p.alpha()}, {"beta", p.beta()}};
        } else {
          j = {{"model", "ar_garch"}, {"phi", p.phi()}, {"alpha", p.alpha()}, {"beta", p.beta()}};
        }
      },
      params);
}

ModelParams model_params_from_json(const nlohmann::json& j) {
  const std::string model = j.value("model", std::string());
  auto vec = [&](const char* key) {
    if (!j.contains(key)) return std::vector<double>{};
    const auto& v = j.at(key);
    if (v.is_number()) return std::vector<double>{v.get<double>()};
    return v.get<std::vector<double>>();
  };
  if (model == "arma" || model == "ar" || model == "ma") return ArmaParams(vec("phi"), vec("theta"));
  if (model == "garch") return GarchParams(j.value("omega", 1.0), vec("alpha"), vec("beta"));
  if (model == "ar_garch") return ArGarchParams(j.value("phi", 0.0), j.value("alpha", 0.0), j.value("beta", 0.0));
  throw ValidationError("unknown model kind: \"" + model + "\"");
}

void to_json(nlohmann::json& j, const Truth& truth) {
  j = nlohmann::json{{"params", truth.params}, {"noise", truth.noise}, {"innovations", truth.innovations}};
  if (!truth.sigma2.empty()) j["sigma2"] = truth.sigma2;
}

}  // namespace splitfit
