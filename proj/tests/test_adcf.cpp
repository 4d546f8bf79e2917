#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "splitfit/adcf.hpp"
#include "splitfit/error.hpp"
#include "splitfit/noise.hpp"
#include "splitfit/rng.hpp"

using namespace splitfit;

namespace {

// T(h) via row sums of the two kernel matrices, plain summation.
double row_sum_oracle(const std::vector<double>& z, std::size_t h, double sv, double tv) {
  const std::size_t m = z.size() - h;
  double s1 = 0.0, ta = 0.0, tb = 0.0, s3 = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double ra = 0.0, rb = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double a = std::exp(-0.5 * sv * (z[j] - z[k]) * (z[j] - z[k]));
      const double b = std::exp(-0.5 * tv * (z[j + h] - z[k + h]) * (z[j + h] - z[k + h]));
      s1 += a * b;
      ra += a;
      rb += b;
    }
    ta += ra;
    tb += rb;
    s3 += ra * rb;
  }
  const double md = static_cast<double>(m);
  return s1 / (md * md) + ta * tb / (md * md * md * md) - 2.0 * s3 / (md * md * md);
}

}  // namespace

TEST_CASE("weight measure and kernel") {
  const auto w = WeightMeasure::gaussian_product();
  CHECK(w.label() == "gaussian_product(0.5,0.5)");
  CHECK(kernel_mu_hat(w, 0.0, 0.0) == 1.0);
  CHECK(kernel_mu_hat(w, 2.0, 0.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(kernel_mu_hat(w, 1.3, -0.4) == kernel_mu_hat(w, -1.3, 0.4));

  // Real part of the N(0, 0.5) characteristic function at 2 by quadrature.
  auto integrand = [](double s) { return std::cos(2.0 * s) * std::exp(-s * s) / std::sqrt(M_PI); };
  const double by_quadrature = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -20.0, 20.0);
  CHECK(kernel_mu_hat(w, 2.0, 0.0) == Catch::Approx(by_quadrature).margin(1e-8));

  CHECK_THROWS_AS(WeightMeasure::gaussian_product(0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(WeightMeasure::gaussian_product(0.5, std::numeric_limits<double>::infinity()), ValidationError);
}

TEST_CASE("factorized statistic agrees with the literal sums") {
  const auto w = WeightMeasure::gaussian_product(0.5, 1.5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto z = sample(NoiseSpec::student_t(6.0), 14, seed);
    const auto fast = adcf_statistics(z, 3, w);
    const auto slow = adcf_statistics(z, 3, w, AdcfMethod::literal);
    for (std::size_t h = 0; h <= 3; ++h) {
      CHECK(fast[h] == Catch::Approx(slow[h]).margin(1e-12));
      CHECK(fast[h] >= -1e-10);
    }
    CHECK(adcf_statistic(z, 2, w) == Catch::Approx(fast[2]).margin(1e-15));
  }
}

TEST_CASE("streaming path for long residual vectors") {
  const auto w = WeightMeasure::gaussian_product();
  const auto z = sample(NoiseSpec::gaussian(), 4100, 77);
  const auto t = adcf_statistics(z, 1, w);
  CHECK(t[0] == Catch::Approx(row_sum_oracle(z, 0, 0.5, 0.5)).epsilon(1e-9));
  CHECK(t[1] == Catch::Approx(row_sum_oracle(z, 1, 0.5, 0.5)).epsilon(1e-7));

  const auto s = sample(NoiseSpec::gaussian(), 600, 78);
  const auto ts = adcf_statistics(s, 2, w);
  for (std::size_t h = 0; h <= 2; ++h) CHECK(ts[h] == Catch::Approx(row_sum_oracle(s, h, 0.5, 0.5)).epsilon(1e-9));
}

TEST_CASE("adcf report") {
  const auto w = WeightMeasure::gaussian_product();
  const std::vector<double> flat(30, 1.7);
  CHECK(adcf_statistic(flat, 2, w) == Catch::Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(adcf(flat, 2, w), DegenerateInputError);
  CHECK_THROWS_AS(adcf(flat, 29, w), ValidationError);
  CHECK_THROWS_AS(adcf(flat, 0, w), ValidationError);

  const auto z = sample(NoiseSpec::laplace(), 200, 5);
  const auto rep = adcf(z, 4, w);
  std::vector<double> shifted(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) shifted[j] = z[j] + 3.0;
  const auto rs = adcf(shifted, 4, w);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(rs.T[k] == Catch::Approx(rep.T[k]).margin(1e-12));
    CHECK(rep.R[k] == Catch::Approx(rep.T[k] / rep.T0));
    CHECK(rep.T[k] >= -1e-10);
  }
  CHECK(rep.n_eff == 200);

  // Deterministic dependence shows up at the right lag.
  std::vector<double> dep(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) dep[j] = j >= 2 ? z[j] * std::abs(z[j - 2]) : z[j];
  const auto rd = adcf(dep, 3, w);
  CHECK(rd.R[1] > 3.0 * rd.R[0]);
}

TEST_CASE("Q_ADCF") {
  const auto w = WeightMeasure::gaussian_product();
  AdcfReport rep;
  rep.n_eff = 500;
  rep.lags = {1, 2, 3, 4, 5};
  rep.R = {0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(q_adcf(rep, 5, w).statistic == 0.0);
  CHECK(q_adcf(rep, 5, w).critical_value == Catch::Approx(14.2));
  CHECK_FALSE(q_adcf(rep, 5, w).reject);
  rep.R = {0.01, 0.01, 0.0, 0.0, 0.0};
  const auto out = q_adcf(rep, 2, 7.84);
  CHECK(out.statistic == Catch::Approx(10.0));
  CHECK(out.reject);
  CHECK(out.name == "Q_ADCF");
  CHECK(std::isnan(out.df));
  CHECK(*default_adcf_critical_value(2, w) == Catch::Approx(7.84));
  CHECK(*default_adcf_critical_value(8, w) == Catch::Approx(20.0));
  CHECK_FALSE(default_adcf_critical_value(3, w).has_value());
  CHECK_FALSE(default_adcf_critical_value(5, WeightMeasure::gaussian_product(1.0, 1.0)).has_value());
  CHECK_THROWS_AS(q_adcf(rep, 3, w), ValidationError);
  CHECK_THROWS_AS(q_adcf(rep, 6, 1.0), ValidationError);
}

TEST_CASE("ADCF calibration") {
  const auto w = WeightMeasure::gaussian_product();
  const auto noise = NoiseSpec::gaussian();
  const auto a = calibrate_adcf_quantiles(noise, 60, {1, 3}, true, w, 200, 11, 0.95, 1);
  const auto b = calibrate_adcf_quantiles(noise, 60, {1, 3}, true, w, 200, 11, 0.95, 3);
  REQUIRE(a.quantiles.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.quantiles[i].quantile == b.quantiles[i].quantile);
  CHECK(a.quantiles[1].quantile > a.quantiles[0].quantile);
  CHECK(a.quantiles[0].quantile_se > 0.0);

  // The maximum over replications, computed independently.
  double max_stat = 0.0;
  for (std::size_t r = 0; r < 200; ++r) {
    const auto rep = adcf(sample(noise, 60, 11 ^ r), 1, w);
    max_stat = std::max(max_stat, 60.0 * rep.R[0]);
  }
  CHECK(calibrate_adcf_quantile(noise, 60, 1, false, w, 200, 11, 1.0) == Catch::Approx(max_stat).epsilon(1e-12));
  const double q90 = calibrate_adcf_quantile(noise, 60, 1, false, w, 200, 11, 0.90);
  const double q95 = calibrate_adcf_quantile(noise, 60, 1, false, w, 200, 11, 0.95);
  CHECK(q90 <= q95);
  CHECK(q95 <= max_stat);
  CHECK_THROWS_AS(calibrate_adcf_quantile(noise, 60, 1, false, w, 199, 11, 0.95), ValidationError);

  const nlohmann::json j = a;
  CHECK(j.at("form") == "sum");
  CHECK(j.at("quantiles").size() == 2);
  CHECK(weight_from_json(j.at("weight")) == w);
}

TEST_CASE("adcf serialization") {
  const auto rep = adcf(sample(NoiseSpec::gaussian(), 50, 9), 3, WeightMeasure::gaussian_product());
  std::ostringstream out;
  write_adcf_csv(out, rep);
  const auto text = out.str();
  CHECK(text.rfind("lag,T,R,n_times_R\n0,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  const nlohmann::json j = rep;
  CHECK(j.at("T").size() == 3);
}
