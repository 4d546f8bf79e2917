#include "splitfit/noise.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "splitfit/error.hpp"

namespace splitfit {
namespace {

constexpr double kQuadratureTolerance = 1e-10;

// Density of the unit-scale Student-t standardized to the given variance.
struct StandardizedT {
  double df;
  double scale;  // sqrt(variance * (df - 2) / df)
  double log_norm;

  StandardizedT(double nu, double variance)
      : df(nu),
        scale(std::sqrt(variance * (nu - 2.0) / nu)),
        log_norm(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi)) {}

  double density(double z) const {
    const double u = z / scale;
    return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(u * u / df)) / scale;
  }
};

struct FourierIntegrators {
  boost::math::quadrature::ooura_fourier_cos<double> cos_rule{kQuadratureTolerance};
  boost::math::quadrature::ooura_fourier_sin<double> sin_rule{kQuadratureTolerance};
};

FourierIntegrators& integrators() {
  thread_local FourierIntegrators instance;
  return instance;
}

double checked(std::pair<double, double> outcome, const char* what, double t) {
  const auto [value, error] = outcome;
  if (!std::isfinite(value) || !(error <= 1e-6 * std::max(1.0, std::abs(value)))) {
    throw NumericalError(std::string("Student-t characteristic function quadrature failed for ") + what +
                         " at t=" + std::to_string(t));
  }
  return value;
}

CharFnValue student_t_char_fn(const NoiseSpec& spec, double t) {
  if (t == 0.0) return {1.0, 0.0, -spec.variance()};
  const StandardizedT dist(spec.df(), spec.variance());
  const double omega = std::abs(t);
  auto& rules = integrators();
  // phi(t) = 2 int_0^inf cos(tz) f(z) dz, -phi'(t) = 2 int_0^inf z sin(tz) f(z) dz,
  // -phi''(t) = 2 int_0^inf z^2 cos(tz) f(z) dz.
  const double value = 2.0 * checked(rules.cos_rule.integrate([&](double z) { return dist.density(z); }, omega),
                                     "phi", t);
  const double odd = 2.0 * checked(rules.sin_rule.integrate([&](double z) { return z * dist.density(z); }, omega),
                                   "phi'", t);
  const double second =
      -2.0 * checked(rules.cos_rule.integrate([&](double z) { return z * z * dist.density(z); }, omega), "phi''", t);
  const double first = t > 0.0 ? -odd : odd;
  return {value, first, second};
}

}  // namespace

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian:
      return "gaussian";
    case NoiseFamily::laplace:
      return "laplace";
    case NoiseFamily::student_t:
      return "student_t";
  }
  return "unknown";
}

NoiseSpec::NoiseSpec(NoiseFamily family, double variance, double df) : family_(family), variance_(variance), df_(df) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ValidationError("noise variance must be positive and finite");
  }
  if (family == NoiseFamily::student_t && !(df > 4.0)) {
    throw ValidationError("Student-t degrees of freedom must exceed 4 (finite fourth moment)");
  }
}

NoiseSpec NoiseSpec::gaussian(double variance) { return {NoiseFamily::gaussian, variance, 0.0}; }
NoiseSpec NoiseSpec::laplace(double variance) { return {NoiseFamily::laplace, variance, 0.0}; }
NoiseSpec NoiseSpec::student_t(double df, double variance) { return {NoiseFamily::student_t, variance, df}; }

double NoiseSpec::fourth_moment() const noexcept {
  const double v2 = variance_ * variance_;
  switch (family_) {
    case NoiseFamily::gaussian:
      return 3.0 * v2;
    case NoiseFamily::laplace:
      return 6.0 * v2;
    case NoiseFamily::student_t:
      return 3.0 * (df_ - 2.0) / (df_ - 4.0) * v2;
  }
  return 0.0;
}

double NoiseSpec::draw(Rng& rng) const {
  switch (family_) {
    case NoiseFamily::gaussian:
      return std::sqrt(variance_) * rng.normal();
    case NoiseFamily::laplace: {
      // Inverse CDF with scale b = sigma / sqrt(2).
      const double u = rng.uniform() - 0.5;
      const double b = std::sqrt(0.5 * variance_);
      return u < 0.0 ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
    }
    case NoiseFamily::student_t: {
      const double z = rng.normal();
      const double chi2 = 2.0 * rng.gamma(0.5 * df_);
      const double raw = z / std::sqrt(chi2 / df_);
      return raw * std::sqrt(variance_ * (df_ - 2.0) / df_);
    }
  }
  return 0.0;
}

std::vector<double> sample(const NoiseSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& value : out) value = spec.draw(rng);
  return out;
}

CharFnValue char_fn_derivatives(const NoiseSpec& spec, double t) {
  const double v = spec.variance();
  switch (spec.family()) {
    case NoiseFamily::gaussian: {
      const double phi = std::exp(-0.5 * v * t * t);
      return {phi, -v * t * phi, (v * v * t * t - v) * phi};
    }
    case NoiseFamily::laplace: {
      const double a = 0.5 * v;
      const double d = 1.0 + a * t * t;
      return {1.0 / d, -2.0 * a * t / (d * d), -2.0 * a / (d * d) + 8.0 * a * a * t * t / (d * d * d)};
    }
    case NoiseFamily::student_t:
      return student_t_char_fn(spec, t);
  }
  return {1.0, 0.0, 0.0};
}

std::complex<double> char_fn(const NoiseSpec& spec, double t) { return {char_fn_derivatives(spec, t).value, 0.0}; }

double tau_arma(const NoiseSpec& spec, double t) {
  if (t == 0.0) return 1.0;
  if (spec.family() == NoiseFamily::gaussian) return 1.0;
  const auto cf = char_fn_derivatives(spec, t);
  if (cf.value == 0.0) throw NumericalError("tau_arma: characteristic function vanishes at t=" + std::to_string(t));
  return -cf.first / (t * spec.variance() * cf.value);
}

double tau_garch(const NoiseSpec& spec, double t) {
  if (std::abs(spec.variance() - 1.0) > 1e-12) {
    throw ValidationError("tau_garch requires unit-variance noise");
  }
  if (t == 0.0) return 1.0;
  if (spec.family() == NoiseFamily::gaussian) return 1.0;
  const auto cf = char_fn_derivatives(spec, t);
  if (cf.first == 0.0) {
    throw NumericalError("tau_garch: phi'(t) vanishes at t=" + std::to_string(t));
  }
  return -2.0 / (spec.fourth_moment() - 1.0) * (cf.value + cf.second) / (t * cf.first);
}

void to_json(nlohmann::json& j, const NoiseSpec& spec) {
  j = nlohmann::json{{"family", std::string(to_string(spec.family()))}, {"variance", spec.variance()}};
  if (spec.family() == NoiseFamily::student_t) j["df"] = spec.df();
}

NoiseSpec noise_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("noise spec must be a JSON object");
  const std::string family = j.value("family", std::string("gaussian"));
  const double variance = j.value("variance", 1.0);
  if (family == "gaussian" || family == "normal") return NoiseSpec::gaussian(variance);
  if (family == "laplace") return NoiseSpec::laplace(variance);
  if (family == "student_t" || family == "t") {
    if (!j.contains("df")) throw ValidationError("Student-t noise requires \"df\"");
    return NoiseSpec::student_t(j.at("df").get<double>(), variance);
  }
  throw ValidationError("unknown noise family: " + family);
}

}  // namespace splitfit
