#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "splitfit/adcf.hpp"
#include "splitfit/models.hpp"
#include "splitfit/noise.hpp"
#include "splitfit/splitting.hpp"

namespace splitfit {

enum class Statistic { acf, acf2, adcf, q_acf, q_acf2, q_adcf, q_lb };

std::string_view to_string(Statistic s);
Statistic parse_statistic(std::string_view text);
bool is_test(Statistic s);

/// One data-generating process of an experiment.
struct GeneratorCell {
  std::string label;
  ModelParams params;
  NoiseSpec noise = NoiseSpec::gaussian();
  std::optional<std::size_t> burn_in;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<GeneratorCell> cells;
  ModelKind fit;
  std::vector<SplitToken> splits;
  std::vector<Statistic> statistics;
  std::vector<std::size_t> lags;  // test lags h
  std::size_t max_lag = 0;        // per-lag summaries cover 1..max_lag; 0 means max(lags)
  std::size_t n = 0;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  WeightMeasure weight = WeightMeasure::gaussian_product();
  std::map<std::size_t, double> critical_values;  // Q_ADCF, by h
  std::size_t lb_df_adjust = 1;
  double level = 0.95;
  double max_failure_fraction = 0.05;
  FitOptions fit_options;

  /// Canonical JSON form; config_from_json(to_json()) reproduces the config.
  nlohmann::json to_json() const;
  /// Lag count used for per-lag summaries.
  std::size_t summary_lags() const;
  /// Throws ValidationError describing the first violated requirement.
  void validate() const;
};

/// Parses a config document. A top-level "scales" object maps scale names
/// to overrides that are merged (JSON merge patch) when `scale` is given;
/// "desk" is accepted even when absent and means the document as written.
ExperimentConfig config_from_json(const nlohmann::json& j, std::string_view scale = {});
ExperimentConfig load_config(const std::filesystem::path& path, std::string_view scale = {});

struct LagSummary {
  std::string cell;
  std::string split;
  std::size_t f = 0;
  std::size_t l = 0;
  Statistic statistic = Statistic::acf;  // sqrt(l) rho for acf/acf2, l R for adcf
  std::size_t lag = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  double q95_se = 0.0;
  double q975 = 0.0;
};

struct TestSummary {
  std::string cell;
  std::string split;
  std::size_t f = 0;
  std::size_t l = 0;
  Statistic test = Statistic::q_acf;
  std::size_t h = 0;
  double df = 0.0;  // NaN for Q_ADCF
  double critical_value = 0.0;
  std::size_t count = 0;
  double reject_rate = 0.0;  // percent
  double mean = 0.0;
  double median = 0.0;
  double median_se = 0.0;
  double q95 = 0.0;
  double q95_se = 0.0;
  double ks_chi2 = 0.0;  // KS distance to chi-squared_df; NaN for Q_ADCF
};

struct CellExclusions {
  std::string cell;
  std::size_t excluded = 0;
};

struct ExperimentResult {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::vector<CellExclusions> exclusions;
  std::vector<LagSummary> lag_summaries;
  std::vector<TestSummary> test_summaries;
  /// Wall-clock time; reported by callers but never written to output files.
  double runtime_seconds = 0.0;

  const TestSummary& test(std::string_view cell, std::string_view split, Statistic test, std::size_t h) const;
  const LagSummary& lag(std::string_view cell, std::string_view split, Statistic statistic, std::size_t lag) const;
};

/// FNV-1a hash of the canonical config JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Runs every replication on `workers` threads. Output does not depend on
/// the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers = 1);

/// AR(1) with GARCH(1, 1) noise (unit intercept), 500 burn-in steps.
SeriesSample generate_ar_garch(double phi, double alpha, double beta, const NoiseSpec& noise, std::size_t n,
                               std::uint64_t seed);

nlohmann::json to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

/// Lag table CSV header.
extern const char* const kLagCsvHeader;
/// Test table CSV header.
extern const char* const kTestCsvHeader;

std::string lag_table_csv(const ExperimentResult& result);
std::string test_table_csv(const ExperimentResult& result);

enum class EmitFormat { csv, json, both };

/// Writes <prefix>_lags.csv and <prefix>_tests.csv and/or <prefix>.json and
/// returns the paths written.
std::vector<std::filesystem::path> emit(const ExperimentResult& result, EmitFormat format,
                                        const std::filesystem::path& prefix);

}  // namespace splitfit
