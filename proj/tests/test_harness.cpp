#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "splitfit/error.hpp"
#include "splitfit/harness.hpp"

using namespace splitfit;
using nlohmann::json;

namespace {

json small_config() {
  return json::parse(R"({
    "name": "small",
    "generator": {"model": "ar", "phi": 0.5, "noise": {"family": "laplace"}},
    "fit": "ar:1",
    "splits": ["half", "full", {"f": 60, "l": 120}],
    "statistics": ["acf", "acf2", "adcf", "q_acf", "q_acf2", "q_lb", "q_adcf"],
    "lags": [2, 5],
    "max_lag": 3,
    "n": 200,
    "reps": 24,
    "seed": "0x2a",
    "scales": {"full": {"reps": 30, "n": 300}}
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = config_from_json(small_config());
  CHECK(cfg.name == "small");
  REQUIRE(cfg.cells.size() == 1);
  CHECK(cfg.cells[0].label == "main");
  CHECK(cfg.seed == 42);
  CHECK(cfg.reps == 24);
  CHECK(cfg.summary_lags() == 3);
  CHECK(cfg.statistics.size() == 7);
  CHECK(cfg.splits[2].label() == "f=60;l=120");

  const auto full = config_from_json(small_config(), "full");
  CHECK(full.reps == 30);
  CHECK(full.n == 300);
  CHECK(config_from_json(small_config(), "desk").reps == 24);
  CHECK_THROWS_AS(config_from_json(small_config(), "huge"), ValidationError);

  const auto again = config_from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg) != config_hash(full));
  CHECK(config_hash(cfg).size() == 16);

  auto j = small_config();
  j["generator"] = json::array({{{"model", "ar"}, {"phi", 0.2}}, {{"model", "ma"}, {"theta", 0.4}}});
  const auto two = config_from_json(j);
  CHECK(two.cells[0].label == "cell0");
  CHECK(two.cells[1].label == "cell1");

  CHECK(parse_statistic("q_lb") == Statistic::q_lb);
  CHECK(to_string(Statistic::adcf) == "adcf");
  CHECK(is_test(Statistic::q_adcf));
  CHECK_FALSE(is_test(Statistic::acf2));
}

TEST_CASE("config validation errors") {
  auto expect_invalid = [](json j) { CHECK_THROWS_AS(config_from_json(j).validate(), ValidationError); };
  auto j = small_config();
  j["bogus"] = 1;
  expect_invalid(j);
  j = small_config();
  j.erase("generator");
  expect_invalid(j);
  j = small_config();
  j["statistics"] = json::array({"q_what"});
  expect_invalid(j);
  j = small_config();
  j["lags"] = json::array({1});
  j["statistics"] = json::array({"q_lb"});
  expect_invalid(j);
  j = small_config();
  j["lags"] = json::array({3});
  j["statistics"] = json::array({"q_adcf"});
  expect_invalid(j);
  j = small_config();
  j["lags"] = json::array({0});
  expect_invalid(j);
  j = small_config();
  j["reps"] = -3;
  expect_invalid(j);
  j = small_config();
  j["max_lag"] = 150;
  expect_invalid(j);
  j = small_config();
  j["splits"] = json::array({"0,10"});
  expect_invalid(j);
  j = small_config();
  j["generator"] = json::array({{{"model", "ar"}, {"phi", 0.2}, {"label", "a"}}, {{"model", "ar"}, {"label", "a"}}});
  expect_invalid(j);
  j = small_config();
  j["lags"] = json::array();
  expect_invalid(j);
  j = small_config();
  j["seed"] = "seven";
  expect_invalid(j);
  j = small_config();
  j["generator"]["phi"] = 1.2;
  expect_invalid(j);
}

TEST_CASE("experiment determinism and layout") {
  const auto cfg = config_from_json(small_config());
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 4);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(lag_table_csv(a) == lag_table_csv(b));
  CHECK(test_table_csv(a) == test_table_csv(b));

  // 3 splits x 3 per-lag statistics x 3 lags; 3 splits x 4 tests x 2 lags.
  CHECK(a.lag_summaries.size() == 27);
  CHECK(a.test_summaries.size() == 24);
  CHECK(a.exclusions.at(0).excluded == 0);

  const auto& lb = a.test("main", "half", Statistic::q_lb, 5);
  CHECK(lb.df == 4.0);
  CHECK(lb.count == 24);
  CHECK(lb.reject_rate >= 0.0);
  CHECK(lb.reject_rate <= 100.0);
  const auto& qa = a.test("main", "full", Statistic::q_adcf, 2);
  CHECK(std::isnan(qa.df));
  CHECK(std::isnan(qa.ks_chi2));
  CHECK(qa.critical_value == Catch::Approx(7.84));
  const auto& lag = a.lag("main", "f=60;l=120", Statistic::acf, 1);
  CHECK(lag.f == 60);
  CHECK(lag.l == 120);
  CHECK(lag.q025 <= lag.q50);
  CHECK(lag.q50 <= lag.q975);
  CHECK_THROWS_AS(a.test("main", "half", Statistic::q_lb, 3), ValidationError);
  CHECK_THROWS_AS(a.lag("other", "half", Statistic::acf, 1), ValidationError);

  const auto back = result_from_json(to_json(a));
  CHECK(to_json(back).dump() == to_json(a).dump());
  CHECK(to_json(a).dump().find("runtime") == std::string::npos);

  auto one = small_config();
  one["reps"] = 1;
  const auto r1 = run_experiment(config_from_json(one), 1);
  const auto r2 = run_experiment(config_from_json(one), 1);
  CHECK(to_json(r1).dump() == to_json(r2).dump());

  auto shifted = small_config();
  shifted["seed"] = 43;
  CHECK(lag_table_csv(run_experiment(config_from_json(shifted))) != lag_table_csv(a));
}

TEST_CASE("emitting results") {
  const auto dir = std::filesystem::temp_directory_path() / "splitfit_harness_test";
  std::filesystem::create_directories(dir);
  auto j = small_config();
  j["statistics"] = json::array();
  const auto empty = run_experiment(config_from_json(j));
  const auto paths = emit(empty, EmitFormat::both, dir / "empty");
  CHECK(paths.size() == 3);
  CHECK(slurp(dir / "empty_lags.csv") == std::string(kLagCsvHeader) + "\n");
  CHECK(slurp(dir / "empty_tests.csv") == std::string(kTestCsvHeader) + "\n");
  CHECK(json::parse(slurp(dir / "empty.json")).at("name") == "small");

  const auto full = run_experiment(config_from_json(small_config()), 2);
  CHECK(emit(full, EmitFormat::csv, dir / "csv").size() == 2);
  CHECK_FALSE(std::filesystem::exists(dir / "csv.json"));
  const auto csv = slurp(dir / "csv_tests.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 25);
  CHECK(emit(full, EmitFormat::json, dir / "js").size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("failed replications") {
  auto j = json::parse(R"({
    "generator": {"model": "garch", "omega": 1.0, "alpha": 0.1, "beta": 0.8},
    "fit": "garch:1,1",
    "statistics": ["q_acf2"],
    "lags": [2],
    "n": 300,
    "reps": 4,
    "seed": 1,
    "optim": {"max_iter": 1}
  })");
  CHECK_THROWS_AS(run_experiment(config_from_json(j)), NumericalError);
  j["max_failure_fraction"] = 0.99;
  CHECK_THROWS_AS(run_experiment(config_from_json(j)), NumericalError);
  j.erase("optim");
  j["max_failure_fraction"] = 0.0;
  const auto ok = run_experiment(config_from_json(j));
  CHECK(ok.exclusions.at(0).excluded == 0);
}

TEST_CASE("AR(1)-GARCH(1,1) generator") {
  const auto iid = generate_ar_garch(0.0, 0.0, 0.0, NoiseSpec::gaussian(), 200, 9);
  REQUIRE(iid.truth);
  for (std::size_t t = 0; t < 200; ++t) {
    CHECK(iid.x[t] == Catch::Approx(iid.truth->innovations[t]).margin(1e-14));
    CHECK(iid.truth->sigma2[t] == Catch::Approx(1.0));
  }

  const auto s = generate_ar_garch(0.5, 0.3, 0.6, NoiseSpec::gaussian(), 300, 10);
  const auto& tr = *s.truth;
  for (std::size_t t = 1; t < 300; ++t) {
    const double eps_prev = tr.innovations[t - 1];
    CHECK(s.x[t] - 0.5 * s.x[t - 1] == Catch::Approx(tr.innovations[t]).margin(1e-10));
    CHECK(tr.sigma2[t] == Catch::Approx(1.0 + 0.3 * eps_prev * eps_prev + 0.6 * tr.sigma2[t - 1]).epsilon(1e-10));
  }
  const auto again = generate_ar_garch(0.5, 0.3, 0.6, NoiseSpec::gaussian(), 300, 10);
  CHECK(again.x == s.x);
  CHECK_THROWS_AS(generate_ar_garch(0.5, 0.6, 0.6, NoiseSpec::gaussian(), 100, 1), ValidationError);
  CHECK_THROWS_AS(generate_ar_garch(1.0, 0.1, 0.1, NoiseSpec::gaussian(), 100, 1), ValidationError);
}
