#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "splitfit/acf.hpp"
#include "splitfit/adcf.hpp"
#include "splitfit/error.hpp"
#include "splitfit/harness.hpp"
#include "splitfit/models.hpp"
#include "splitfit/noise.hpp"
#include "splitfit/parallel.hpp"
#include "splitfit/series_io.hpp"
#include "splitfit/splitting.hpp"

using namespace splitfit;
using nlohmann::json;

namespace {

struct NoiseFlags {
  std::string family = "gaussian";
  double df = 5.0;
  double variance = 1.0;

  void add(CLI::App* app) {
    app->add_option("--noise", family, "Innovation family: gaussian, laplace or student_t")
        ->check(CLI::IsMember({"gaussian", "laplace", "student_t"}));
    app->add_option("--df", df, "Student-t degrees of freedom (> 4)");
    app->add_option("--noise-var", variance, "Innovation variance");
  }

  NoiseSpec spec() const {
    if (family == "laplace") return NoiseSpec::laplace(variance);
    if (family == "student_t") return NoiseSpec::student_t(df, variance);
    return NoiseSpec::gaussian(variance);
  }
};

struct SimulateArgs {
  std::string model = "ar";
  std::vector<double> phi;
  std::vector<double> theta;
  double omega = 1.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  NoiseFlags noise;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> burn_in;
  std::string out;
  std::string truth;
};

struct FitArgs {
  std::string in;
  std::string model = "ar:1";
  std::string split = "full";
  std::string out;
};

struct DiagnoseArgs {
  std::string in;
  std::string model = "ar:1";
  std::string split = "half";
  std::vector<std::string> stats{"q_acf"};
  std::vector<std::size_t> lags{10};
  std::string format = "csv";
  std::string out;
  double level = 0.95;
  std::size_t lb_df_adjust = 1;
  std::vector<double> critical;
  double s_var = 0.5;
  double t_var = 0.5;
};

struct CalibrateArgs {
  std::string config;
  NoiseFlags noise;
  std::size_t n = 500;
  std::vector<std::size_t> lags{2, 5, 8};
  std::string form = "sum";
  std::size_t reps = 1000;
  std::uint64_t seed = 20240601;
  double level = 0.95;
  double s_var = 0.5;
  double t_var = 0.5;
  std::string out;
};

struct ExperimentArgs {
  std::string config;
  std::string scale = "desk";
  std::string out;
  std::string format = "both";
};

ModelParams simulate_params(const SimulateArgs& a) {
  if (a.model == "ar") {
    if (!a.theta.empty()) throw ValidationError("--theta is not used by --model ar");
    return ArmaParams(a.phi, {});
  }
  if (a.model == "ma") {
    if (!a.phi.empty()) throw ValidationError("--phi is not used by --model ma");
    return ArmaParams({}, a.theta);
  }
  if (a.model == "arma") return ArmaParams(a.phi, a.theta);
  if (a.model == "garch") return GarchParams(a.omega, a.alpha, a.beta);
  if (a.phi.size() > 1 || a.alpha.size() > 1 || a.beta.size() > 1) {
    throw ValidationError("ar_garch takes a single --phi, --alpha and --beta");
  }
  auto first = [](const std::vector<double>& v) { return v.empty() ? 0.0 : v.front(); };
  return ArGarchParams(first(a.phi), first(a.alpha), first(a.beta));
}

int run_simulate(const SimulateArgs& a) {
  const auto params = simulate_params(a);
  const auto noise = a.noise.spec();
  const auto sample = std::visit(
      [&](const auto& p) -> SeriesSample {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArmaParams>) {
          return simulate_arma(p, noise, a.n, a.burn_in, a.seed);
        } else if constexpr (std::is_same_v<T, GarchParams>) {
          return simulate_garch(p, noise, a.n, a.burn_in, a.seed);
        } else {
          return simulate_ar_garch(p, noise, a.n, a.burn_in.value_or(500), a.seed);
        }
      },
      params);
  write_series_csv(a.out, sample.x);
  if (!a.truth.empty() && sample.truth) write_json_file(a.truth, json(*sample.truth));
  std::cout << "wrote " << sample.x.size() << " observations to " << a.out << '\n';
  return 0;
}

int run_fit(const FitArgs& a) {
  const auto x = read_series_csv(a.in);
  const auto model = ModelKind::parse(a.model);
  const auto split = SplitToken::parse(std::string_view(a.split)).resolve(x.size());
  const auto fit = fit_model(std::span<const double>(x).first(split.f()), model);
  json j = fit;
  j["fit_model"] = model.to_string();
  j["f"] = split.f();
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  if (!fit.converged) throw NumericalError("fit did not converge after " + std::to_string(fit.iterations) + " iterations");
  return 0;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

int run_diagnose(const DiagnoseArgs& a) {
  const auto x = read_series_csv(a.in);
  const auto model = ModelKind::parse(a.model);
  const auto split = SplitToken::parse(std::string_view(a.split)).resolve(x.size());
  std::vector<Statistic> stats;
  for (const auto& s : a.stats) stats.push_back(parse_statistic(s));
  if (a.lags.empty()) throw ValidationError("--lags needs at least one value");
  if (!a.critical.empty() && a.critical.size() != a.lags.size()) {
    throw ValidationError("--critical needs one value per --lags entry");
  }
  const auto weight = WeightMeasure::gaussian_product(a.s_var, a.t_var);
  const std::size_t h_max = *std::max_element(a.lags.begin(), a.lags.end());

  const auto res = split_residuals(x, model, split);
  if (!res.fit.converged) throw NumericalError("fit did not converge after " + std::to_string(res.fit.iterations) + " iterations");
  const auto coef = split_coefficients(split);

  auto has = [&](Statistic s) { return std::find(stats.begin(), stats.end(), s) != stats.end(); };
  std::optional<AcfReport> acf;
  std::optional<AcfReport> acf2;
  std::optional<AdcfReport> dc;
  if (has(Statistic::acf) || has(Statistic::q_acf) || has(Statistic::q_lb)) {
    acf = residual_acf(res.z_hat, h_max);
    acf->regime = coef;
  }
  if (has(Statistic::acf2) || has(Statistic::q_acf2)) {
    acf2 = squared_residual_acf(res.z_hat, h_max);
    acf2->regime = coef;
  }
  if (has(Statistic::adcf) || has(Statistic::q_adcf)) dc = adcf(res.z_hat, h_max, weight);

  std::vector<TestOutcome> tests;
  for (Statistic s : stats) {
    if (!is_test(s)) continue;
    for (std::size_t i = 0; i < a.lags.size(); ++i) {
      const std::size_t h = a.lags[i];
      switch (s) {
        case Statistic::q_acf:
          tests.push_back(q_acf(*acf, h, a.level));
          break;
        case Statistic::q_acf2:
          tests.push_back(q_acf2(*acf2, h, a.level));
          break;
        case Statistic::q_lb:
          tests.push_back(q_ljung_box(*acf, h, a.lb_df_adjust, a.level));
          break;
        default:
          tests.push_back(a.critical.empty() ? q_adcf(*dc, h, weight) : q_adcf(*dc, h, a.critical[i]));
          break;
      }
    }
  }

  if (!a.out.empty()) {
    if (a.format == "json" || a.format == "both") {
      json j = {{"fit", res.fit},
                {"fit_model", model.to_string()},
                {"split", {{"f", split.f()}, {"l", split.l()}, {"n", split.n()}, {"k_ra", coef.k_ra}, {"k_ov", coef.k_ov}}},
                {"tests", tests}};
      if (acf) j["acf"] = *acf;
      if (acf2) j["acf2"] = *acf2;
      if (dc) j["adcf"] = *dc;
      write_json_file(a.out + ".json", j);
    }
    if (a.format == "csv" || a.format == "both") {
      std::ostringstream s;
      if (acf) {
        write_acf_csv(s, *acf);
        write_text_file(a.out + "_acf.csv", s.str());
        s.str("");
      }
      if (acf2) {
        write_acf_csv(s, *acf2);
        write_text_file(a.out + "_acf2.csv", s.str());
        s.str("");
      }
      if (dc) {
        write_adcf_csv(s, *dc);
        write_text_file(a.out + "_adcf.csv", s.str());
        s.str("");
      }
      s << "test,h,statistic,df,critical_value,p_value,reject\n";
      for (const auto& t : tests) {
        s << t.name << ',' << t.h << ',' << format_double(t.statistic) << ',' << format_double(t.df) << ','
          << format_double(t.critical_value) << ',' << (t.p_value ? format_double(*t.p_value) : "") << ','
          << (t.reject ? 1 : 0) << '\n';
      }
      write_text_file(a.out + "_tests.csv", s.str());
    }
  }

  std::cout << "model " << model.to_string() << " fitted on f=" << split.f() << ", residuals l=" << split.l()
            << " of n=" << split.n() << "; k_ra=" << fixed(coef.k_ra) << " k_ov=" << fixed(coef.k_ov) << '\n';
  for (const auto& t : tests) {
    std::cout << t.name << "(" << t.h << "): statistic=" << fixed(t.statistic) << " critical=" << fixed(t.critical_value)
              << " verdict=" << (t.reject ? "reject" : "accept");
    if (t.iid_calibrated && !*t.iid_calibrated) std::cout << " (chi-squared calibration assumes k_ra = 2 k_ov)";
    std::cout << '\n';
  }
  return 0;
}

int run_calibrate(const CalibrateArgs& a, unsigned workers) {
  NoiseSpec noise = a.noise.spec();
  std::size_t n = a.n;
  std::vector<std::size_t> lags = a.lags;
  bool sum_form = a.form == "sum";
  std::size_t reps = a.reps;
  std::uint64_t seed = a.seed;
  double level = a.level;
  WeightMeasure weight = WeightMeasure::gaussian_product(a.s_var, a.t_var);
  if (!a.config.empty()) {
    const auto j = read_json_file(a.config);
    try {
      if (j.contains("noise")) noise = noise_from_json(j.at("noise"));
      n = j.value("n", n);
      lags = j.value("lags", lags);
      if (j.contains("form")) {
        const auto form = j.at("form").get<std::string>();
        if (form != "sum" && form != "single") throw ValidationError("form must be 'sum' or 'single'");
        sum_form = form == "sum";
      }
      reps = j.value("reps", reps);
      seed = j.value("seed", seed);
      level = j.value("level", level);
      if (j.contains("weight")) weight = weight_from_json(j.at("weight"));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed calibration config: ") + e.what());
    }
  }
  const auto table = calibrate_adcf_quantiles(noise, n, lags, sum_form, weight, reps, seed, level, workers);
  const json j = table;
  if (!a.out.empty()) write_json_file(a.out, j);
  for (const auto& q : table.quantiles) {
    std::cout << "h=" << q.h << " quantile=" << fixed(q.quantile) << " se=" << fixed(q.quantile_se) << '\n';
  }
  return 0;
}

int run_experiment_cmd(const ExperimentArgs& a, unsigned workers) {
  const auto cfg = load_config(a.config, a.scale);
  const auto result = run_experiment(cfg, workers);
  const EmitFormat format = a.format == "csv" ? EmitFormat::csv : a.format == "json" ? EmitFormat::json : EmitFormat::both;
  const std::string prefix = a.out.empty() ? cfg.name : a.out;
  for (const auto& p : emit(result, format, prefix)) std::cout << "wrote " << p.string() << '\n';
  std::size_t excluded = 0;
  for (const auto& e : result.exclusions) excluded += e.excluded;
  std::cerr << "experiment " << cfg.name << ": " << cfg.reps << " replications, " << excluded << " excluded, "
            << fixed(result.runtime_seconds, 1) << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-splitting goodness-of-fit diagnostics for ARMA and GARCH models"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = SPLITFIT_THREADS or hardware concurrency)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a series and write it as single-column CSV");
  simulate->add_option("--model", sim.model, "Model: ar, ma, arma, garch or ar_garch")
      ->check(CLI::IsMember({"ar", "ma", "arma", "garch", "ar_garch"}));
  simulate->add_option("--phi", sim.phi, "AR coefficients, comma separated")->delimiter(',');
  simulate->add_option("--theta", sim.theta, "MA coefficients, comma separated")->delimiter(',');
  simulate->add_option("--omega", sim.omega, "GARCH intercept (garch only; ar_garch uses 1)");
  simulate->add_option("--alpha", sim.alpha, "GARCH ARCH coefficients, comma separated")->delimiter(',');
  simulate->add_option("--beta", sim.beta, "GARCH variance coefficients, comma separated")->delimiter(',');
  sim.noise.add(simulate);
  simulate->add_option("--n", sim.n, "Number of observations")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "64-bit RNG seed");
  simulate->add_option("--burn-in", sim.burn_in, "Discarded warm-up steps (default: model dependent)");
  simulate->add_option("--out", sim.out, "Output CSV path")->required();
  simulate->add_option("--truth", sim.truth, "Optional JSON sidecar with parameters and innovations");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and print the estimate as JSON");
  fit_cmd->add_option("--in", fit.in, "Input series CSV (header x)")->required();
  fit_cmd->add_option("--model", fit.model, "Model kind: ar:p, arma:p,q or garch:p,q");
  fit_cmd->add_option("--split", fit.split, "Fit on the analysis part of this split: half, full or f,l");
  fit_cmd->add_option("--out", fit.out, "Output JSON path (stdout when empty)");

  DiagnoseArgs diag;
  auto* diagnose = app.add_subcommand("diagnose", "Fit on the analysis split and test the assessment residuals");
  diagnose->add_option("--in", diag.in, "Input series CSV (header x)")->required();
  diagnose->add_option("--model", diag.model, "Model kind: ar:p, arma:p,q or garch:p,q");
  diagnose->add_option("--split", diag.split, "Split: half, full or f,l (observation counts)");
  diagnose->add_option("--stats", diag.stats, "Statistics: acf, acf2, adcf, q_acf, q_acf2, q_adcf, q_lb")
      ->delimiter(',');
  diagnose->add_option("--lags", diag.lags, "Test lags h, comma separated; reports cover 1..max(h)")
      ->delimiter(',');
  diagnose->add_option("--format", diag.format, "Report format: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  diagnose->add_option("--out", diag.out, "Report path prefix (no files when empty)");
  diagnose->add_option("--level", diag.level, "Chi-squared test level");
  diagnose->add_option("--lb-df-adjust", diag.lb_df_adjust, "Ljung-Box df = h - this value");
  diagnose->add_option("--critical", diag.critical, "Q_ADCF critical values, one per lag (default: built-in table)")
      ->delimiter(',');
  diagnose->add_option("--s-var", diag.s_var, "ADCF weight variance for the first coordinate");
  diagnose->add_option("--t-var", diag.t_var, "ADCF weight variance for the lagged coordinate");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Simulate Q_ADCF or n R(h) null quantiles for iid noise");
  auto* cal_config = calibrate->add_option("--config", cal.config, "JSON file with any of the fields below");
  cal.noise.add(calibrate);
  calibrate->add_option("--n", cal.n, "Series length")->check(CLI::PositiveNumber);
  calibrate->add_option("--lags", cal.lags, "Lags h, comma separated")->delimiter(',');
  calibrate->add_option("--form", cal.form, "sum: n sum_{k<=h} R(k); single: n R(h)")
      ->check(CLI::IsMember({"sum", "single"}));
  calibrate->add_option("--reps", cal.reps, "Replications (>= 200)");
  calibrate->add_option("--seed", cal.seed, "64-bit RNG seed");
  calibrate->add_option("--level", cal.level, "Quantile level in [0, 1]");
  calibrate->add_option("--s-var", cal.s_var, "Weight variance for the first coordinate");
  calibrate->add_option("--t-var", cal.t_var, "Weight variance for the lagged coordinate");
  calibrate->add_option("--out", cal.out, "Output JSON path");
  for (const char* name : {"--noise", "--df", "--noise-var", "--n", "--lags", "--form", "--reps", "--seed", "--level",
                           "--s-var", "--t-var"}) {
    cal_config->excludes(calibrate->get_option(name));
  }

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a JSON config");
  experiment->add_option("--config", exp.config, "Experiment config JSON")->required();
  experiment->add_option("--scale", exp.scale, "Scale preset from the config's scales object");
  experiment->add_option("--out", exp.out, "Output path prefix (default: config name)");
  experiment->add_option("--format", exp.format, "Output format: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const unsigned workers = threads != 0 ? threads : default_worker_count();
  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (diagnose->parsed()) return run_diagnose(diag);
    if (calibrate->parsed()) return run_calibrate(cal, workers);
    return run_experiment_cmd(exp, workers);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
