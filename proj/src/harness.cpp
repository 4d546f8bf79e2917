#include "splitfit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "splitfit/acf.hpp"
#include "splitfit/chi_squared.hpp"
#include "splitfit/error.hpp"
#include "splitfit/parallel.hpp"
#include "splitfit/series_io.hpp"
#include "splitfit/summary_stats.hpp"

namespace splitfit {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr Statistic kAllStatistics[] = {Statistic::acf,   Statistic::acf2,   Statistic::adcf, Statistic::q_acf,
                                        Statistic::q_acf2, Statistic::q_adcf, Statistic::q_lb};

const std::set<std::string> kConfigKeys = {
    "name",  "description", "generator", "fit",    "splits",           "statistics",           "lags",
    "max_lag", "n",         "reps",      "seed",   "weight",           "critical_values",      "lb_df_adjust",
    "level", "max_failure_fraction", "garch_space", "optim", "scales"};

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::size_t>(v.get<long long>());
  if (v.is_number_float() && v.get<double>() >= 0.0 && std::floor(v.get<double>()) == v.get<double>()) {
    return static_cast<std::size_t>(v.get<double>());
  }
  throw ValidationError(std::string("config field '") + key + "' must be a non-negative integer");
}

GeneratorCell cell_from_json(const json& j, std::size_t index) {
  if (!j.is_object()) throw ValidationError("generator entries must be objects");
  GeneratorCell cell{j.value("label", "cell" + std::to_string(index)), model_params_from_json(j),
                     j.contains("noise") ? noise_from_json(j.at("noise")) : NoiseSpec::gaussian(), std::nullopt};
  if (j.contains("burn_in")) cell.burn_in = get_count(j, "burn_in", 0);
  return cell;
}

json cell_to_json(const GeneratorCell& cell) {
  json j = cell.params;
  j["label"] = cell.label;
  j["noise"] = cell.noise;
  if (cell.burn_in) j["burn_in"] = *cell.burn_in;
  return j;
}

SeriesSample simulate_cell(const GeneratorCell& cell, std::size_t n, std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> SeriesSample {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArmaParams>) {
          return simulate_arma(p, cell.noise, n, cell.burn_in, seed);
        } else if constexpr (std::is_same_v<T, GarchParams>) {
          return simulate_garch(p, cell.noise, n, cell.burn_in, seed);
        } else {
          return simulate_ar_garch(p, cell.noise, n, cell.burn_in.value_or(500), seed);
        }
      },
      cell.params);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double json_number(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

// Slot layout of one (cell, replication) record.
struct Layout {
  std::vector<Statistic> lag_stats;
  std::vector<Statistic> tests;
  std::size_t splits = 0;
  std::size_t lags = 0;
  std::size_t hs = 0;

  std::size_t per_split() const { return lag_stats.size() * lags + tests.size() * hs * 2; }
  std::size_t size() const { return splits * per_split(); }
  std::size_t lag_slot(std::size_t s, std::size_t stat, std::size_t lag) const {
    return s * per_split() + stat * lags + lag;
  }
  std::size_t test_slot(std::size_t s, std::size_t test, std::size_t h) const {
    return s * per_split() + lag_stats.size() * lags + (test * hs + h) * 2;
  }
};

double test_df(Statistic test, std::size_t h, std::size_t lb_adjust) {
  switch (test) {
    case Statistic::q_acf:
    case Statistic::q_acf2:
      return static_cast<double>(h);
    case Statistic::q_lb:
      return static_cast<double>(h - lb_adjust);
    default:
      return kNaN;
  }
}

bool contains(const std::vector<Statistic>& v, Statistic s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::acf:
      return "acf";
    case Statistic::acf2:
      return "acf2";
    case Statistic::adcf:
      return "adcf";
    case Statistic::q_acf:
      return "q_acf";
    case Statistic::q_acf2:
      return "q_acf2";
    case Statistic::q_adcf:
      return "q_adcf";
    case Statistic::q_lb:
      return "q_lb";
  }
  return "unknown";
}

Statistic parse_statistic(std::string_view text) {
  for (Statistic s : kAllStatistics) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown statistic '" + std::string(text) +
                        "' (expected acf, acf2, adcf, q_acf, q_acf2, q_adcf or q_lb)");
}

bool is_test(Statistic s) {
  return s == Statistic::q_acf || s == Statistic::q_acf2 || s == Statistic::q_adcf || s == Statistic::q_lb;
}

std::size_t ExperimentConfig::summary_lags() const {
  if (max_lag != 0) return max_lag;
  return lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw ValidationError("config needs reps >= 1");
  if (n < 10) throw ValidationError("config needs n >= 10");
  if (cells.empty()) throw ValidationError("config needs at least one generator");
  if (splits.empty()) throw ValidationError("config needs at least one split");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0)) {
    throw ValidationError("max_failure_fraction must lie in [0, 1)");
  }
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  std::set<std::string> labels;
  for (const auto& c : cells) {
    if (!labels.insert(c.label).second) throw ValidationError("duplicate generator label '" + c.label + "'");
  }
  std::size_t min_l = n;
  for (const auto& token : splits) min_l = std::min(min_l, token.resolve(n).l());
  const bool have_tests = std::any_of(statistics.begin(), statistics.end(), is_test);
  if (have_tests && lags.empty()) throw ValidationError("test statistics need at least one lag");
  for (std::size_t h : lags) {
    if (h == 0) throw ValidationError("lags must be >= 1");
    if (h + 1 >= min_l) throw ValidationError("lag " + std::to_string(h) + " is too large for the assessment length");
    if (contains(statistics, Statistic::q_lb) && h <= lb_df_adjust) {
      throw ValidationError("Q_LB at h=" + std::to_string(h) + " has no degrees of freedom after adjusting by " +
                            std::to_string(lb_df_adjust));
    }
    if (contains(statistics, Statistic::q_adcf) && !critical_values.count(h) &&
        !default_adcf_critical_value(h, weight)) {
      throw ValidationError("no Q_ADCF critical value for h=" + std::to_string(h) + " and weight " + weight.label() +
                            "; run calibrate first");
    }
  }
  if (summary_lags() + 1 >= min_l) throw ValidationError("max_lag is too large for the assessment length");
  const bool have_lag_stats = std::any_of(statistics.begin(), statistics.end(), [](Statistic s) { return !is_test(s); });
  if (have_lag_stats && summary_lags() == 0) throw ValidationError("per-lag statistics need max_lag or lags");
}

json ExperimentConfig::to_json() const {
  json gens = json::array();
  for (const auto& c : cells) gens.push_back(cell_to_json(c));
  json stats = json::array();
  for (Statistic s : statistics) stats.push_back(std::string(to_string(s)));
  json cvs = json::object();
  for (const auto& [h, v] : critical_values) cvs[std::to_string(h)] = v;
  json split_list = json::array();
  for (const auto& s : splits) split_list.push_back(s);
  return json{{"name", name},
              {"generator", gens},
              {"fit", fit.to_string()},
              {"splits", split_list},
              {"statistics", stats},
              {"lags", lags},
              {"max_lag", max_lag},
              {"n", n},
              {"reps", reps},
              {"seed", seed},
              {"weight", weight},
              {"critical_values", cvs},
              {"lb_df_adjust", lb_df_adjust},
              {"level", level},
              {"max_failure_fraction", max_failure_fraction},
              {"garch_space",
               {{"lower", fit_options.garch_space.lower},
                {"upper", fit_options.garch_space.upper},
                {"rho0", fit_options.garch_space.rho0}}},
              {"optim",
               {{"rel_tol", fit_options.optim.rel_tol},
                {"max_iter", fit_options.optim.max_iter},
                {"grad_tol", fit_options.optim.grad_tol}}}};
}

ExperimentConfig config_from_json(const json& input, std::string_view scale) {
  if (!input.is_object()) throw ValidationError("config must be a JSON object");
  json j = input;
  if (!scale.empty()) {
    const std::string key(scale);
    if (j.contains("scales") && j.at("scales").contains(key)) {
      j.merge_patch(j.at("scales").at(key));
    } else if (key != "desk") {
      throw ValidationError("config defines no scale '" + key + "'");
    }
  }
  j.erase("scales");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.count(key)) throw ValidationError("unknown config field '" + key + "'");
  }

  try {
    ExperimentConfig cfg;
    cfg.name = j.value("name", cfg.name);
    if (!j.contains("generator")) throw ValidationError("config needs a generator");
    const auto& gen = j.at("generator");
    if (gen.is_array()) {
      for (std::size_t i = 0; i < gen.size(); ++i) cfg.cells.push_back(cell_from_json(gen[i], i));
    } else {
      auto cell = cell_from_json(gen, 0);
      if (!gen.contains("label")) cell.label = "main";
      cfg.cells.push_back(cell);
    }
    if (!j.contains("fit")) throw ValidationError("config needs a fit model");
    cfg.fit = ModelKind::parse(j.at("fit").get<std::string>());
    if (j.contains("splits")) {
      for (const auto& s : j.at("splits")) cfg.splits.push_back(SplitToken::parse(s));
    } else {
      cfg.splits.push_back(SplitToken::parse(std::string_view("half")));
    }
    for (const auto& s : j.value("statistics", json::array())) cfg.statistics.push_back(parse_statistic(s.get<std::string>()));
    for (const auto& h : j.value("lags", json::array())) {
      if (!h.is_number_integer() || h.get<long long>() < 1) throw ValidationError("lags must be positive integers");
      cfg.lags.push_back(h.get<std::size_t>());
    }
    cfg.max_lag = get_count(j, "max_lag", 0);
    if (!j.contains("n")) throw ValidationError("config needs n");
    cfg.n = get_count(j, "n", 0);
    cfg.reps = get_count(j, "reps", 1);
    if (j.contains("seed")) {
      const auto& s = j.at("seed");
      if (s.is_string()) {
        cfg.seed = std::stoull(s.get<std::string>(), nullptr, 0);
      } else if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0)) {
        cfg.seed = s.get<std::uint64_t>();
      } else {
        throw ValidationError("seed must be a non-negative integer");
      }
    }
    if (j.contains("weight")) cfg.weight = weight_from_json(j.at("weight"));
    if (j.contains("critical_values")) {
      for (const auto& [key, value] : j.at("critical_values").items()) {
        cfg.critical_values[std::stoul(key)] = value.get<double>();
      }
    }
    cfg.lb_df_adjust = get_count(j, "lb_df_adjust", 1);
    cfg.level = j.value("level", cfg.level);
    cfg.max_failure_fraction = j.value("max_failure_fraction", cfg.max_failure_fraction);
    if (j.contains("garch_space")) {
      const auto& g = j.at("garch_space");
      auto& space = cfg.fit_options.garch_space;
      space = {g.value("lower", space.lower), g.value("upper", space.upper), g.value("rho0", space.rho0)};
    }
    if (j.contains("optim")) {
      const auto& o = j.at("optim");
      auto& opt = cfg.fit_options.optim;
      opt.rel_tol = o.value("rel_tol", opt.rel_tol);
      opt.max_iter = get_count(o, "max_iter", opt.max_iter);
      opt.grad_tol = o.value("grad_tol", opt.grad_tol);
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, std::string_view scale) {
  return config_from_json(read_json_file(path), scale);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = cfg.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SeriesSample generate_ar_garch(double phi, double alpha, double beta, const NoiseSpec& noise, std::size_t n,
                               std::uint64_t seed) {
  return simulate_ar_garch(ArGarchParams(phi, alpha, beta), noise, n, 500, seed);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  Layout layout;
  for (Statistic s : cfg.statistics) (is_test(s) ? layout.tests : layout.lag_stats).push_back(s);
  layout.splits = cfg.splits.size();
  layout.lags = cfg.summary_lags();
  layout.hs = cfg.lags.size();
  std::vector<SplitSpec> specs;
  for (const auto& token : cfg.splits) specs.push_back(token.resolve(cfg.n));

  const bool want_acf = contains(cfg.statistics, Statistic::acf) || contains(cfg.statistics, Statistic::q_acf) ||
                        contains(cfg.statistics, Statistic::q_lb);
  const bool want_acf2 = contains(cfg.statistics, Statistic::acf2) || contains(cfg.statistics, Statistic::q_acf2);
  const bool want_adcf = contains(cfg.statistics, Statistic::adcf) || contains(cfg.statistics, Statistic::q_adcf);
  const std::size_t max_h = cfg.lags.empty() ? 0 : *std::max_element(cfg.lags.begin(), cfg.lags.end());
  const std::size_t h_all = std::max(layout.lags, max_h);

  auto critical = [&](std::size_t h) {
    const auto it = cfg.critical_values.find(h);
    return it != cfg.critical_values.end() ? it->second : *default_adcf_critical_value(h, cfg.weight);
  };

  const std::size_t n_cells = cfg.cells.size();
  std::vector<std::vector<double>> records(n_cells * cfg.reps);
  std::vector<std::string> failures(n_cells * cfg.reps);

  if (!cfg.statistics.empty()) {
    parallel_for(cfg.reps, workers, [&](std::size_t r) {
      const std::uint64_t stream = cfg.seed ^ static_cast<std::uint64_t>(r);
      for (std::size_t c = 0; c < n_cells; ++c) {
        const auto series = simulate_cell(cfg.cells[c], cfg.n, stream);
        std::vector<double> rec(layout.size(), 0.0);
        try {
          for (std::size_t s = 0; s < specs.size(); ++s) {
            const auto res = split_residuals(series.x, cfg.fit, specs[s], cfg.fit_options);
            if (!res.fit.converged) throw NumericalError("fit did not converge");
            const double l = static_cast<double>(res.z_hat.size());
            std::optional<AcfReport> acf;
            std::optional<AcfReport> acf2;
            std::optional<AdcfReport> dc;
            if (want_acf) acf = residual_acf(res.z_hat, h_all);
            if (want_acf2) acf2 = squared_residual_acf(res.z_hat, h_all);
            if (want_adcf) dc = adcf(res.z_hat, h_all, cfg.weight);
            for (std::size_t i = 0; i < layout.lag_stats.size(); ++i) {
              for (std::size_t k = 0; k < layout.lags; ++k) {
                double v = 0.0;
                switch (layout.lag_stats[i]) {
                  case Statistic::acf:
                    v = std::sqrt(l) * acf->rho[k];
                    break;
                  case Statistic::acf2:
                    v = std::sqrt(l) * acf2->rho[k];
                    break;
                  default:
                    v = l * dc->R[k];
                    break;
                }
                rec[layout.lag_slot(s, i, k)] = v;
              }
            }
            for (std::size_t t = 0; t < layout.tests.size(); ++t) {
              for (std::size_t hi = 0; hi < cfg.lags.size(); ++hi) {
                const std::size_t h = cfg.lags[hi];
                TestOutcome out;
                switch (layout.tests[t]) {
                  case Statistic::q_acf:
                    out = q_acf(*acf, h, cfg.level);
                    break;
                  case Statistic::q_acf2:
                    out = q_acf2(*acf2, h, cfg.level);
                    break;
                  case Statistic::q_lb:
                    out = q_ljung_box(*acf, h, cfg.lb_df_adjust, cfg.level);
                    break;
                  default:
                    out = q_adcf(*dc, h, critical(h));
                    break;
                }
                const std::size_t slot = layout.test_slot(s, t, hi);
                rec[slot] = out.statistic;
                rec[slot + 1] = out.reject ? 1.0 : 0.0;
              }
            }
          }
          records[c * cfg.reps + r] = std::move(rec);
        } catch (const NumericalError& e) {
          failures[c * cfg.reps + r] = e.what();
        }
      }
    });
  }

  ExperimentResult result;
  result.name = cfg.name;
  result.config_hash = config_hash(cfg);
  result.seed = cfg.seed;
  result.n = cfg.n;
  result.reps = cfg.reps;

  for (std::size_t c = 0; c < n_cells; ++c) {
    const auto& cell = cfg.cells[c];
    std::vector<const std::vector<double>*> kept;
    std::size_t excluded = 0;
    std::string first_failure;
    if (!cfg.statistics.empty()) {
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        if (!failures[c * cfg.reps + r].empty()) {
          if (excluded++ == 0) first_failure = "replication " + std::to_string(r) + ": " + failures[c * cfg.reps + r];
        } else {
          kept.push_back(&records[c * cfg.reps + r]);
        }
      }
    }
    if (static_cast<double>(excluded) > cfg.max_failure_fraction * static_cast<double>(cfg.reps)) {
      throw NumericalError("aborting: " + std::to_string(excluded) + " of " + std::to_string(cfg.reps) +
                           " replications failed for generator '" + cell.label + "' (first: " + first_failure + ")");
    }
    result.exclusions.push_back({cell.label, excluded});

    auto column = [&](std::size_t slot) {
      std::vector<double> v;
      v.reserve(kept.size());
      for (const auto* rec : kept) v.push_back((*rec)[slot]);
      return v;
    };

    for (std::size_t s = 0; s < specs.size(); ++s) {
      const std::string split = cfg.splits[s].label();
      for (std::size_t i = 0; i < layout.lag_stats.size(); ++i) {
        for (std::size_t k = 0; k < layout.lags; ++k) {
          auto v = column(layout.lag_slot(s, i, k));
          LagSummary row;
          row.cell = cell.label;
          row.split = split;
          row.f = specs[s].f();
          row.l = specs[s].l();
          row.statistic = layout.lag_stats[i];
          row.lag = k + 1;
          row.count = v.size();
          row.mean = mean(v);
          row.variance = variance(v);
          row.variance_se = variance_se(v);
          std::sort(v.begin(), v.end());
          row.q025 = quantile_sorted(v, 0.025);
          row.q50 = quantile_sorted(v, 0.5);
          row.q95 = quantile_sorted(v, 0.95);
          row.q95_se = quantile_se_sorted(v, 0.95);
          row.q975 = quantile_sorted(v, 0.975);
          result.lag_summaries.push_back(row);
        }
      }
      for (std::size_t t = 0; t < layout.tests.size(); ++t) {
        for (std::size_t hi = 0; hi < cfg.lags.size(); ++hi) {
          const std::size_t h = cfg.lags[hi];
          const std::size_t slot = layout.test_slot(s, t, hi);
          auto v = column(slot);
          const auto rejects = column(slot + 1);
          TestSummary row;
          row.cell = cell.label;
          row.split = split;
          row.f = specs[s].f();
          row.l = specs[s].l();
          row.test = layout.tests[t];
          row.h = h;
          row.df = test_df(row.test, h, cfg.lb_df_adjust);
          row.critical_value = std::isnan(row.df) ? critical(h) : chi2_quantile(cfg.level, row.df);
          row.count = v.size();
          double rej = 0.0;
          for (double x : rejects) rej += x;
          row.reject_rate = v.empty() ? kNaN : 100.0 * rej / static_cast<double>(v.size());
          row.mean = mean(v);
          row.ks_chi2 = std::isnan(row.df) || v.empty() ? kNaN : ks_distance_chi2(v, row.df);
          std::sort(v.begin(), v.end());
          row.median = quantile_sorted(v, 0.5);
          row.median_se = quantile_se_sorted(v, 0.5);
          row.q95 = quantile_sorted(v, 0.95);
          row.q95_se = quantile_se_sorted(v, 0.95);
          result.test_summaries.push_back(row);
        }
      }
    }
  }
  result.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

const TestSummary& ExperimentResult::test(std::string_view cell, std::string_view split, Statistic t,
                                          std::size_t h) const {
  for (const auto& row : test_summaries) {
    if (row.cell == cell && row.split == split && row.test == t && row.h == h) return row;
  }
  throw ValidationError("no test summary for " + std::string(cell) + "/" + std::string(split) + "/" +
                        std::string(to_string(t)) + "/h=" + std::to_string(h));
}

const LagSummary& ExperimentResult::lag(std::string_view cell, std::string_view split, Statistic s,
                                        std::size_t k) const {
  for (const auto& row : lag_summaries) {
    if (row.cell == cell && row.split == split && row.statistic == s && row.lag == k) return row;
  }
  throw ValidationError("no lag summary for " + std::string(cell) + "/" + std::string(split) + "/" +
                        std::string(to_string(s)) + "/lag=" + std::to_string(k));
}

json to_json(const ExperimentResult& r) {
  json excl = json::array();
  for (const auto& e : r.exclusions) excl.push_back({{"cell", e.cell}, {"excluded", e.excluded}});
  json lags = json::array();
  for (const auto& x : r.lag_summaries) {
    lags.push_back({{"cell", x.cell},         {"split", x.split},   {"f", x.f},
                    {"l", x.l},               {"statistic", std::string(to_string(x.statistic))},
                    {"lag", x.lag},           {"count", x.count},   {"mean", x.mean},
                    {"variance", x.variance}, {"variance_se", x.variance_se},
                    {"q025", x.q025},         {"q50", x.q50},       {"q95", x.q95},
                    {"q95_se", x.q95_se},     {"q975", x.q975}});
  }
  json tests = json::array();
  for (const auto& x : r.test_summaries) {
    tests.push_back({{"cell", x.cell},
                     {"split", x.split},
                     {"f", x.f},
                     {"l", x.l},
                     {"test", std::string(to_string(x.test))},
                     {"h", x.h},
                     {"df", x.df},
                     {"critical_value", x.critical_value},
                     {"count", x.count},
                     {"reject_rate", x.reject_rate},
                     {"mean", x.mean},
                     {"median", x.median},
                     {"median_se", x.median_se},
                     {"q95", x.q95},
                     {"q95_se", x.q95_se},
                     {"ks_chi2", x.ks_chi2}});
  }
  return json{{"name", r.name},   {"config_hash", r.config_hash}, {"seed", r.seed},        {"n", r.n},
              {"reps", r.reps},   {"exclusions", excl},           {"lag_summaries", lags}, {"test_summaries", tests}};
}

ExperimentResult result_from_json(const json& j) {
  try {
    ExperimentResult r;
    r.name = j.at("name").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n = j.at("n").get<std::size_t>();
    r.reps = j.at("reps").get<std::size_t>();
    for (const auto& e : j.at("exclusions")) r.exclusions.push_back({e.at("cell"), e.at("excluded")});
    for (const auto& x : j.at("lag_summaries")) {
      LagSummary s;
      s.cell = x.at("cell");
      s.split = x.at("split");
      s.f = x.at("f");
      s.l = x.at("l");
      s.statistic = parse_statistic(x.at("statistic").get<std::string>());
      s.lag = x.at("lag");
      s.count = x.at("count");
      s.mean = json_number(x.at("mean"));
      s.variance = json_number(x.at("variance"));
      s.variance_se = json_number(x.at("variance_se"));
      s.q025 = json_number(x.at("q025"));
      s.q50 = json_number(x.at("q50"));
      s.q95 = json_number(x.at("q95"));
      s.q95_se = json_number(x.at("q95_se"));
      s.q975 = json_number(x.at("q975"));
      r.lag_summaries.push_back(s);
    }
    for (const auto& x : j.at("test_summaries")) {
      TestSummary s;
      s.cell = x.at("cell");
      s.split = x.at("split");
      s.f = x.at("f");
      s.l = x.at("l");
      s.test = parse_statistic(x.at("test").get<std::string>());
      s.h = x.at("h");
      s.df = json_number(x.at("df"));
      s.critical_value = json_number(x.at("critical_value"));
      s.count = x.at("count");
      s.reject_rate = json_number(x.at("reject_rate"));
      s.mean = json_number(x.at("mean"));
      s.median = json_number(x.at("median"));
      s.median_se = json_number(x.at("median_se"));
      s.q95 = json_number(x.at("q95"));
      s.q95_se = json_number(x.at("q95_se"));
      s.ks_chi2 = json_number(x.at("ks_chi2"));
      r.test_summaries.push_back(s);
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed experiment result: ") + e.what());
  }
}

const char* const kLagCsvHeader =
    "cell,split,f,l,statistic,lag,count,mean,variance,variance_se,q025,q50,q95,q95_se,q975";
const char* const kTestCsvHeader =
    "cell,split,f,l,test,h,df,critical_value,count,reject_rate,mean,median,median_se,q95,q95_se,ks_chi2";

std::string lag_table_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << kLagCsvHeader << '\n';
  for (const auto& x : result.lag_summaries) {
    out << csv_field(x.cell) << ',' << csv_field(x.split) << ',' << x.f << ',' << x.l << ',' << to_string(x.statistic)
        << ',' << x.lag << ',' << x.count << ',' << format_double(x.mean) << ',' << format_double(x.variance) << ','
        << format_double(x.variance_se) << ',' << format_double(x.q025) << ',' << format_double(x.q50) << ','
        << format_double(x.q95) << ',' << format_double(x.q95_se) << ',' << format_double(x.q975) << '\n';
  }
  return out.str();
}

std::string test_table_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << kTestCsvHeader << '\n';
  for (const auto& x : result.test_summaries) {
    out << csv_field(x.cell) << ',' << csv_field(x.split) << ',' << x.f << ',' << x.l << ',' << to_string(x.test)
        << ',' << x.h << ',' << format_double(x.df) << ',' << format_double(x.critical_value) << ',' << x.count << ','
        << format_double(x.reject_rate) << ',' << format_double(x.mean) << ',' << format_double(x.median) << ','
        << format_double(x.median_se) << ',' << format_double(x.q95) << ',' << format_double(x.q95_se) << ','
        << format_double(x.ks_chi2) << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> emit(const ExperimentResult& result, EmitFormat format,
                                        const std::filesystem::path& prefix) {
  std::vector<std::filesystem::path> written;
  auto sibling = [&](const std::string& suffix) {
    auto p = prefix;
    p += suffix;
    return p;
  };
  if (format != EmitFormat::json) {
    written.push_back(sibling("_lags.csv"));
    write_text_file(written.back(), lag_table_csv(result));
    written.push_back(sibling("_tests.csv"));
    write_text_file(written.back(), test_table_csv(result));
  }
  if (format != EmitFormat::csv) {
    written.push_back(sibling(".json"));
    write_json_file(written.back(), to_json(result));
  }
  return written;
}

}  // namespace splitfit
