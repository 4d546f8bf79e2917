#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "splitfit/error.hpp"
#include "splitfit/models.hpp"
#include "splitfit/splitting.hpp"
#include "splitfit/summary_stats.hpp"

using namespace splitfit;

TEST_CASE("split specs and coefficients") {
  const auto h = half_split(1000);
  CHECK(h.f() == 500);
  CHECK(h.l() == 1000);
  CHECK(split_coefficients(h).k_ra == 2.0);
  CHECK(split_coefficients(h).k_ov == 1.0);
  CHECK(half_split(2) == SplitSpec(1, 2, 2));
  CHECK(half_split(10001) == SplitSpec(5000, 10001, 10001));

  const auto c1 = split_coefficients(SplitSpec(5000, 10000, 10000));
  CHECK((c1.k_ra == 2.0 && c1.k_ov == 1.0));
  const auto c2 = split_coefficients(SplitSpec(2000, 8000, 10000));
  CHECK((c2.k_ra == 4.0 && c2.k_ov == 0.0));
  const auto c3 = split_coefficients(full_split(777));
  CHECK((c3.k_ra == 1.0 && c3.k_ov == 1.0));
  const auto c4 = split_coefficients(half_split(10001));
  CHECK(std::abs(c4.k_ra - 2.0 * c4.k_ov) < 1e-3);

  CHECK_THROWS_AS(SplitSpec(0, 10, 10), ValidationError);
  CHECK_THROWS_AS(SplitSpec(5, 11, 10), ValidationError);
  CHECK_THROWS_AS(SplitSpec(11, 5, 10), ValidationError);
  CHECK_THROWS_AS(SplitSpec(3, 0, 10), ValidationError);
}

TEST_CASE("model kinds") {
  CHECK(ModelKind::parse("ar:1") == ModelKind{ModelKind::Family::ar, 1, 0});
  CHECK(ModelKind::parse("arma:2,1") == ModelKind{ModelKind::Family::arma, 2, 1});
  CHECK(ModelKind::parse("garch:1,1") == ModelKind{ModelKind::Family::garch, 1, 1});
  CHECK(ModelKind::parse("arma:2,1").to_string() == "arma:2,1");
  CHECK_THROWS_AS(ModelKind::parse("ar:0"), ValidationError);
  CHECK_THROWS_AS(ModelKind::parse("sarima:1"), ValidationError);
  CHECK_THROWS_AS(ModelKind::parse("arma:x,1"), ValidationError);
}

TEST_CASE("split residuals") {
  const auto x = simulate_arma(ArmaParams({0.5}, {}), NoiseSpec::gaussian(), 2000, std::nullopt, 31).x;
  const auto ar1 = ModelKind::parse("ar:1");

  SECTION("full split equals the full-sample pipeline") {
    const auto res = split_residuals(x, ar1, full_split(x.size()));
    const auto direct = arma_residuals_truncated(fit_ar_ls(x, 1).arma(), x);
    CHECK(res.z_hat == direct);
  }
  SECTION("half split residual variance") {
    const auto res = split_residuals(x, ar1, half_split(x.size()));
    REQUIRE(res.z_hat.size() == 2000);
    CHECK(std::abs(variance(res.z_hat) - 1.0) < 0.05);
  }
  SECTION("analysis split isolation") {
    const auto y = simulate_arma(ArmaParams({0.5}, {}), NoiseSpec::gaussian(), 10000, std::nullopt, 32).x;
    const SplitSpec disjoint(2000, 8000, 10000);
    const auto res = split_residuals(y, ar1, disjoint);
    const auto ref = fit_ar_ls(std::span<const double>(y).first(2000), 1);
    CHECK(res.fit.arma() == ref.arma());
    CHECK(res.z_hat.size() == 8000);

    auto perturbed = y;
    for (std::size_t j = 2000; j < perturbed.size(); ++j) perturbed[j] += 0.25;
    const auto res2 = split_residuals(perturbed, ar1, disjoint);
    CHECK(res2.fit.arma() == res.fit.arma());
    CHECK(res2.fit.loglik == res.fit.loglik);
    CHECK(res2.z_hat != res.z_hat);

    // The assessment residuals use the whole observed history.
    const auto all = arma_residuals_truncated(res.fit.arma(), y);
    CHECK(res.z_hat.front() == all[2000]);
  }
  SECTION("garch and arma fits") {
    const auto g = simulate_garch(GarchParams(0.5, {0.1}, {0.8}), NoiseSpec::gaussian(), 1500, std::nullopt, 33).x;
    const auto res = split_residuals(g, ModelKind::parse("garch:1,1"), SplitSpec(700, 900, 1500));
    CHECK(res.z_hat.size() == 900);
    CHECK(res.fit.converged);
    const auto a = split_residuals(x, ModelKind::parse("arma:1,1"), half_split(x.size()));
    CHECK(a.z_hat.size() == x.size());
  }
  CHECK_THROWS_AS(split_residuals(x, ar1, SplitSpec(10, 10, 100)), ValidationError);
}

TEST_CASE("split tokens") {
  CHECK(SplitToken::parse(std::string_view("half")).resolve(101) == half_split(101));
  CHECK(SplitToken::parse(std::string_view("full")).resolve(50) == full_split(50));
  CHECK(SplitToken::parse(std::string_view("400,2000")).resolve(2000) == SplitSpec(400, 2000, 2000));
  CHECK(SplitToken::parse(nlohmann::json{{"f", 600}, {"l", 1200}}).resolve(2000) == SplitSpec(600, 1200, 2000));
  CHECK(SplitToken::parse(nlohmann::json{{"f_frac", 0.2}, {"l_frac", 1.0}}).resolve(2000) == SplitSpec(400, 2000, 2000));
  CHECK(SplitToken::parse(std::string_view("400,2000")).label() == "f=400;l=2000");
  CHECK_THROWS_AS(SplitToken::parse(std::string_view("0,10")).resolve(100), ValidationError);
  CHECK_THROWS_AS(SplitToken::parse(std::string_view("bogus")), ValidationError);
  for (const auto& text : {"half", "full", "3,7"}) {
    const auto token = SplitToken::parse(std::string_view(text));
    const nlohmann::json j = token;
    CHECK(SplitToken::parse(j).resolve(20) == token.resolve(20));
  }
}
