#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "splitfit/error.hpp"
#include "splitfit/noise.hpp"
#include "splitfit/summary_stats.hpp"

using namespace splitfit;

namespace {

// Unit-variance Student-t with 5 degrees of freedom has a closed-form
// characteristic function.
double t5_cf(double t) {
  const double a = std::sqrt(3.0) * std::abs(t);
  return std::exp(-a) * (1.0 + a + t * t);
}

double real_cf(const NoiseSpec& spec, double t) { return char_fn(spec, t).real(); }

}  // namespace

TEST_CASE("noise spec validation") {
  CHECK_THROWS_AS(NoiseSpec::gaussian(0.0), ValidationError);
  CHECK_THROWS_AS(NoiseSpec::laplace(-1.0), ValidationError);
  CHECK_THROWS_AS(NoiseSpec::student_t(4.0), ValidationError);
  CHECK_NOTHROW(NoiseSpec::student_t(4.5));
  CHECK(NoiseSpec::gaussian().fourth_moment() == 3.0);
  CHECK(NoiseSpec::laplace().fourth_moment() == 6.0);
  CHECK(NoiseSpec::student_t(6.0).fourth_moment() == Catch::Approx(6.0));
}

TEST_CASE("sampling moments and determinism") {
  const auto g = sample(NoiseSpec::gaussian(), 1000000, 11);
  CHECK(std::abs(variance(g) - 1.0) < 0.01);
  CHECK(std::abs(mean(g)) < 0.005);

  const auto l = sample(NoiseSpec::laplace(), 1000000, 12);
  double abs_mean = 0.0;
  for (double v : l) abs_mean += std::abs(v);
  abs_mean /= static_cast<double>(l.size());
  CHECK(std::abs(abs_mean - 1.0 / std::sqrt(2.0)) < 0.01);
  CHECK(std::abs(variance(l) - 1.0) < 0.02);

  const auto t = sample(NoiseSpec::student_t(8.0, 2.0), 400000, 13);
  CHECK(std::abs(variance(t) - 2.0) < 0.05);

  CHECK(sample(NoiseSpec::laplace(), 100, 5) == sample(NoiseSpec::laplace(), 100, 5));
  CHECK(sample(NoiseSpec::laplace(), 100, 5) != sample(NoiseSpec::laplace(), 100, 6));
}

TEST_CASE("characteristic functions") {
  for (double t : {-3.0, -0.7, 0.0, 0.4, 2.0}) {
    CHECK(real_cf(NoiseSpec::gaussian(), t) == Catch::Approx(std::exp(-t * t / 2.0)).margin(1e-15));
    CHECK(real_cf(NoiseSpec::gaussian(2.0), t) == Catch::Approx(std::exp(-t * t)).margin(1e-15));
    CHECK(real_cf(NoiseSpec::laplace(), t) == Catch::Approx(1.0 / (1.0 + t * t / 2.0)).margin(1e-15));
    CHECK(real_cf(NoiseSpec::laplace(3.0), t) == Catch::Approx(1.0 / (1.0 + 1.5 * t * t)).margin(1e-15));
    CHECK(real_cf(NoiseSpec::student_t(5.0), t) == Catch::Approx(t5_cf(t)).margin(1e-8));
  }
  for (const auto& spec : {NoiseSpec::gaussian(), NoiseSpec::laplace(), NoiseSpec::student_t(7.0)}) {
    CHECK(real_cf(spec, 0.0) == Catch::Approx(1.0).margin(1e-12));
    for (double t : {0.3, 1.1, 4.0}) {
      const auto plus = char_fn(spec, t);
      const auto minus = char_fn(spec, -t);
      CHECK(std::abs(plus - std::conj(minus)) < 1e-12);
      CHECK(std::abs(plus) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("characteristic function derivatives match finite differences") {
  const double eps = 1e-4;
  for (const auto& spec : {NoiseSpec::laplace(), NoiseSpec::student_t(5.0), NoiseSpec::gaussian(0.7)}) {
    for (double t : {0.3, 1.0, 2.5}) {
      const auto d = char_fn_derivatives(spec, t);
      const double f1 = (real_cf(spec, t + eps) - real_cf(spec, t - eps)) / (2.0 * eps);
      const double f2 = (real_cf(spec, t + eps) - 2.0 * real_cf(spec, t) + real_cf(spec, t - eps)) / (eps * eps);
      CHECK(d.first == Catch::Approx(f1).margin(1e-6));
      CHECK(d.second == Catch::Approx(f2).margin(1e-4));
    }
  }
}

TEST_CASE("empirical characteristic function converges") {
  const std::size_t n = 200000;
  for (const auto& spec : {NoiseSpec::gaussian(), NoiseSpec::laplace(), NoiseSpec::student_t(6.0)}) {
    const auto z = sample(spec, n, 77);
    for (double t : {0.5, 1.5}) {
      double c = 0.0;
      for (double v : z) c += std::cos(t * v);
      CHECK(std::abs(c / n - real_cf(spec, t)) < 5.0 / std::sqrt(static_cast<double>(n)));
    }
  }
}

TEST_CASE("tau functions") {
  for (double t : {-4.0, -0.5, 0.5, 2.7, 9.0}) {
    CHECK(tau_arma(NoiseSpec::gaussian(), t) == Catch::Approx(1.0).margin(1e-12));
    CHECK(tau_arma(NoiseSpec::gaussian(2.5), t) == Catch::Approx(1.0).margin(1e-12));
    CHECK(tau_garch(NoiseSpec::gaussian(), t) == Catch::Approx(1.0).margin(1e-12));
  }
  CHECK(tau_arma(NoiseSpec::laplace(), 0.0) == 1.0);
  CHECK(tau_garch(NoiseSpec::laplace(), 0.0) == 1.0);
  CHECK(tau_arma(NoiseSpec::laplace(), 1.0) == Catch::Approx(2.0 / 3.0).margin(1e-14));

  // tau_garch at t=1 from finite differences of the characteristic function.
  const auto lap = NoiseSpec::laplace();
  const double eps = 1e-4;
  const double phi = real_cf(lap, 1.0);
  const double d1 = (real_cf(lap, 1.0 + eps) - real_cf(lap, 1.0 - eps)) / (2.0 * eps);
  const double d2 = (real_cf(lap, 1.0 + eps) - 2.0 * phi + real_cf(lap, 1.0 - eps)) / (eps * eps);
  const double fd_tau = -2.0 / (6.0 - 1.0) * (phi + d2) / d1;
  CHECK(tau_garch(lap, 1.0) == Catch::Approx(fd_tau).margin(1e-6));

  // Student-t(5): tau_arma from the closed-form characteristic function.
  const double t = 0.8;
  const double a = std::sqrt(3.0) * t;
  const double dphi = std::exp(-a) * (-std::sqrt(3.0) * (1.0 + a + t * t) + std::sqrt(3.0) + 2.0 * t);
  CHECK(tau_arma(NoiseSpec::student_t(5.0), t) == Catch::Approx(-dphi / (t * t5_cf(t))).margin(1e-7));

  CHECK_THROWS_AS(tau_garch(NoiseSpec::laplace(2.0), 1.0), ValidationError);
}

TEST_CASE("noise json round trip") {
  for (const auto& spec : {NoiseSpec::gaussian(1.5), NoiseSpec::laplace(), NoiseSpec::student_t(6.5, 2.0)}) {
    const nlohmann::json j = spec;
    CHECK(noise_from_json(j) == spec);
  }
  CHECK(noise_from_json(nlohmann::json{{"family", "laplace"}, {"variance", 1.0}}) == NoiseSpec::laplace());
  CHECK_THROWS_AS(noise_from_json(nlohmann::json{{"family", "cauchy"}}), ValidationError);
}
