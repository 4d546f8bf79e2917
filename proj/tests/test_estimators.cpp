#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "splitfit/error.hpp"
#include "splitfit/estimators.hpp"
#include "splitfit/models.hpp"

using namespace splitfit;

namespace {

// Exact Gaussian log-likelihood with sigma^2 profiled out, from the dense
// autocovariance matrix.
double dense_profile_loglik(const std::vector<double>& x, const std::vector<double>& phi,
                            const std::vector<double>& theta) {
  const std::size_t n = x.size();
  std::vector<double> psi(5000, 0.0);
  psi[0] = 1.0;
  for (std::size_t j = 1; j < psi.size(); ++j) {
    double v = j <= theta.size() ? theta[j - 1] : 0.0;
    for (std::size_t k = 1; k <= phi.size() && k <= j; ++k) v += phi[k - 1] * psi[j - k];
    psi[j] = v;
  }
  Eigen::MatrixXd gamma(n, n);
  for (std::size_t h = 0; h < n; ++h) {
    double g = 0.0;
    for (std::size_t j = 0; j + h < psi.size(); ++j) g += psi[j] * psi[j + h];
    for (std::size_t i = 0; i + h < n; ++i) {
      gamma(i, i + h) = g;
      gamma(i + h, i) = g;
    }
  }
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  const double quad = xv.dot(llt.solve(xv));
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double dn = static_cast<double>(n);
  const double s2 = quad / dn;
  return -0.5 * dn * (std::log(2.0 * std::numbers::pi * s2) + 1.0) - 0.5 * logdet;
}

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
  return simulate_arma(ArmaParams({phi}, {}), NoiseSpec::gaussian(), n, std::nullopt, seed).x;
}

}  // namespace

TEST_CASE("least squares AR") {
  const std::size_t n = 100000;
  CHECK(std::abs(fit_ar_ls(ar1(0.5, n, 1), 1).arma().phi()[0] - 0.5) < 0.02);
  const auto noise = sample(NoiseSpec::gaussian(), n, 2);
  CHECK(std::abs(fit_ar_ls(noise, 1).arma().phi()[0]) < 3.0 / std::sqrt(static_cast<double>(n)));

  const std::vector<double> beta{-0.140, 0.038, 0.304, 0.078, 0.069, 0.013, 0.019, 0.039, 0.148, -0.062};
  const auto x10 = simulate_arma(ArmaParams(beta, {}), NoiseSpec::gaussian(), n, std::nullopt, 3).x;
  const auto fit10 = fit_ar_ls(x10, 10);
  for (std::size_t k = 0; k < beta.size(); ++k) CHECK(std::abs(fit10.arma().phi()[k] - beta[k]) < 0.05);

  const auto x = ar1(0.6, 500, 4);
  std::vector<double> scaled(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) scaled[j] = -3.0 * x[j];
  CHECK(fit_ar_ls(scaled, 1).arma().phi()[0] == Catch::Approx(fit_ar_ls(x, 1).arma().phi()[0]).epsilon(1e-13));

  CHECK_THROWS_AS(fit_ar_ls(std::vector<double>(50, 2.0), 1), NumericalError);
  CHECK_THROWS_AS(fit_ar_ls(std::vector<double>(15, 1.0), 2), ValidationError);
}

TEST_CASE("innovations likelihood equals the dense Gaussian likelihood") {
  const std::vector<double> phi{0.8, 0.1};
  const std::vector<double> theta{0.3};
  const auto x = simulate_arma(ArmaParams(phi, theta), NoiseSpec::laplace(), 60, std::nullopt, 5).x;
  for (const auto& [p, t] : std::vector<std::pair<std::vector<double>, std::vector<double>>>{
           {phi, theta}, {{0.5}, {}}, {{}, {-0.4, 0.2}}, {{0.3, -0.2}, {0.5}}}) {
    const auto lik = arma_gaussian_loglik(x, ArmaParams(p, t));
    CHECK(lik.loglik == Catch::Approx(dense_profile_loglik(x, p, t)).epsilon(1e-10));
  }
}

TEST_CASE("ARMA pseudo maximum likelihood") {
  SECTION("ARMA(2,1) with Laplace noise is consistent") {
    const auto x = simulate_arma(ArmaParams({0.8, 0.1}, {0.3}), NoiseSpec::laplace(), 10000, std::nullopt, 6).x;
    const auto fit = fit_arma_pmle(x, 2, 1);
    CHECK(fit.converged);
    CHECK_FALSE(fit.boundary);
    const auto est = fit.arma().flat();
    CHECK(std::abs(est[0] - 0.8) < 0.05);
    CHECK(std::abs(est[1] - 0.1) < 0.05);
    CHECK(std::abs(est[2] - 0.3) < 0.05);
    CHECK(std::abs(fit.sigma2 - 1.0) < 0.05);

    // Local optimality along each coordinate.
    for (std::size_t i = 0; i < est.size(); ++i) {
      for (double eps : {1e-4, -1e-4}) {
        auto moved = est;
        moved[i] += eps;
        const ArmaParams nb({moved[0], moved[1]}, {moved[2]});
        CHECK(arma_gaussian_loglik(x, nb).loglik <= fit.loglik + 1e-9);
      }
    }
    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1]);
  }
  SECTION("AR(1) agrees with least squares") {
    const std::size_t n = 4000;
    const auto x = ar1(0.5, n, 7);
    const double mle = fit_arma_pmle(x, 1, 0).arma().phi()[0];
    const double ls = fit_ar_ls(x, 1).arma().phi()[0];
    CHECK(std::abs(mle - ls) < 5.0 / std::sqrt(static_cast<double>(n)));
  }
  SECTION("superfluous MA term is near zero") {
    const std::size_t n = 4000;
    const auto fit = fit_arma_pmle(ar1(0.5, n, 8), 1, 1);
    CHECK(std::abs(fit.arma().theta()[0]) < 3.0 / std::sqrt(static_cast<double>(n)));
  }
  SECTION("explicit initial value and hannan-rissanen") {
    const auto x = simulate_arma(ArmaParams({0.4}, {0.4}), NoiseSpec::gaussian(), 3000, std::nullopt, 9).x;
    const auto hr = hannan_rissanen(x, 1, 1);
    CHECK(std::abs(hr.phi()[0] - 0.4) < 0.15);
    const auto a = fit_arma_pmle(x, 1, 1);
    const auto b = fit_arma_pmle(x, 1, 1, ArmaParams({0.0}, {0.0}));
    CHECK(a.arma().phi()[0] == Catch::Approx(b.arma().phi()[0]).margin(1e-4));
  }
  CHECK_THROWS_AS(fit_arma_pmle(ar1(0.5, 30, 1), 1, 1), ValidationError);
  CHECK_THROWS_AS(fit_arma_pmle(std::vector<double>(100, 1.0), 1, 0), NumericalError);
}

TEST_CASE("GARCH quasi maximum likelihood") {
  const GarchParams truth(0.5, {0.1}, {0.8});
  const auto x = simulate_garch(truth, NoiseSpec::gaussian(), 10000, std::nullopt, 10).x;
  const auto fit = fit_garch_qmle(x, 1, 1);
  CHECK(fit.converged);
  const auto est = fit.garch().flat();
  CHECK(std::abs(est[0] - 0.5) < 0.1);
  CHECK(std::abs(est[1] - 0.1) < 0.1);
  CHECK(std::abs(est[2] - 0.8) < 0.1);
  CHECK(fit.loglik >= garch_quasi_loglik(x, truth) - 1e-6);
  CHECK(fit.loglik == Catch::Approx(garch_quasi_loglik(x, fit.garch())).epsilon(1e-12));
  for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1]);

  SECTION("analytic gradient matches finite differences") {
    const GarchParams at(0.4, {0.15}, {0.7});
    const auto g = garch_quasi_loglik_gradient(x, at);
    auto flat = at.flat();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double h = 1e-6;
      auto up = flat;
      auto down = flat;
      up[i] += h;
      down[i] -= h;
      const double fd = (garch_quasi_loglik(x, GarchParams(up[0], {up[1]}, {up[2]})) -
                         garch_quasi_loglik(x, GarchParams(down[0], {down[1]}, {down[2]}))) /
                        (2.0 * h);
      CHECK(g[i] == Catch::Approx(fd).epsilon(1e-5));
    }
  }
  SECTION("iid data") {
    const std::size_t n = 5000;
    const auto z = simulate_garch(GarchParams(2.0, {0.0}, {0.0}), NoiseSpec::gaussian(), n, std::nullopt, 11).x;
    const auto iid = fit_garch_qmle(z, 1, 1);
    const auto e = iid.garch().flat();
    CHECK(e[1] < 3.0 / std::sqrt(static_cast<double>(n)));
    double ss = 0.0;
    for (double v : z) ss += v * v;
    CHECK(e[0] / (1.0 - e[1] - e[2]) == Catch::Approx(ss / n).epsilon(0.1));
  }
  CHECK_THROWS_AS(fit_garch_qmle(std::vector<double>(10, 1.0), 1, 1), ValidationError);
  CHECK_THROWS_AS(fit_garch_qmle(std::vector<double>(100, 0.0), 1, 1), NumericalError);
}

TEST_CASE("root-n consistency") {
  auto rmse = [](auto&& estimate, std::size_t n, std::size_t reps, double truth) {
    double ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double e = estimate(n, 1000 + r) - truth;
      ss += e * e;
    }
    return std::sqrt(ss / reps);
  };
  auto ls = [](std::size_t n, std::uint64_t seed) { return fit_ar_ls(ar1(0.5, n, seed), 1).arma().phi()[0]; };
  auto arma = [](std::size_t n, std::uint64_t seed) {
    const auto x = simulate_arma(ArmaParams({0.5}, {0.3}), NoiseSpec::laplace(), n, std::nullopt, seed).x;
    return fit_arma_pmle(x, 1, 1).arma().theta()[0];
  };
  auto garch = [](std::size_t n, std::uint64_t seed) {
    const auto x = simulate_garch(GarchParams(0.5, {0.1}, {0.8}), NoiseSpec::gaussian(), n, std::nullopt, seed).x;
    return fit_garch_qmle(x, 1, 1).garch().alpha()[0];
  };
  const double r_ls = rmse(ls, 2000, 400, 0.5) / rmse(ls, 500, 400, 0.5);
  const double r_arma = rmse(arma, 2000, 300, 0.3) / rmse(arma, 500, 300, 0.3);
  const double r_garch = rmse(garch, 8000, 150, 0.1) / rmse(garch, 2000, 150, 0.1);
  CHECK(r_ls == Catch::Approx(0.5).margin(0.1));
  CHECK(r_arma == Catch::Approx(0.5).margin(0.1));
  CHECK(r_garch == Catch::Approx(0.5).margin(0.1));
}

TEST_CASE("fit result json") {
  const auto fit = fit_ar_ls(ar1(0.5, 200, 3), 1);
  const nlohmann::json j = fit;
  CHECK(j.at("converged") == true);
  CHECK(j.at("estimate").size() == 1);
  CHECK(j.contains("loglik"));
  CHECK(j.contains("sigma2"));
  CHECK(j.contains("iterations"));
}
