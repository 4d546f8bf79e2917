#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "splitfit/rng.hpp"

namespace splitfit {

enum class NoiseFamily { gaussian, laplace, student_t };

std::string_view to_string(NoiseFamily family);

/// Innovation distribution: a symmetric, mean-zero family scaled to a given
/// variance. Student-t draws are standardized by sqrt((df - 2) / df) and the
/// degrees of freedom must exceed 4 so the fourth moment exists.
class NoiseSpec {
 public:
  static NoiseSpec gaussian(double variance = 1.0);
  static NoiseSpec laplace(double variance = 1.0);
  static NoiseSpec student_t(double df, double variance = 1.0);

  NoiseFamily family() const noexcept { return family_; }
  double variance() const noexcept { return variance_; }
  /// Degrees of freedom; 0 for the non-t families.
  double df() const noexcept { return df_; }

  /// E[Z^4].
  double fourth_moment() const noexcept;

  /// One draw from the distribution.
  double draw(Rng& rng) const;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;

 private:
  NoiseSpec(NoiseFamily family, double variance, double df);

  NoiseFamily family_;
  double variance_;
  double df_;
};

/// n iid draws; deterministic in (spec, n, seed).
std::vector<double> sample(const NoiseSpec& spec, std::size_t n, std::uint64_t seed);

/// Characteristic function and its first two derivatives at t. All supported
/// families are symmetric, so these are real.
struct CharFnValue {
  double value;
  double first;
  double second;
};

CharFnValue char_fn_derivatives(const NoiseSpec& spec, double t);

/// phi_Z(t).
std::complex<double> char_fn(const NoiseSpec& spec, double t);

/// -phi'(t) / (t sigma^2 phi(t)); the removable singularity at t = 0 is
/// filled with its limit 1.
double tau_arma(const NoiseSpec& spec, double t);

/// -2 / (E[Z^4] - 1) * (phi(t) + phi''(t)) / (t phi'(t)) for unit-variance
/// noise; 1 at t = 0.
double tau_garch(const NoiseSpec& spec, double t);

void to_json(nlohmann::json& j, const NoiseSpec& spec);
NoiseSpec noise_from_json(const nlohmann::json& j);

}  // namespace splitfit
