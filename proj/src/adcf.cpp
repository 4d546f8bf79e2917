#include "splitfit/adcf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "splitfit/error.hpp"
#include "splitfit/parallel.hpp"
#include "splitfit/series_io.hpp"
#include "splitfit/summary_stats.hpp"

namespace splitfit {
namespace {

// Above this length the kernel matrices are not stored and entries are
// recomputed for every lag.
constexpr std::size_t kMatrixLimit = 4096;

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

std::vector<double> kernel_matrix(std::span<const double> z, double var) {
  const std::size_t n = z.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double d = z[i] - z[j];
      const double v = std::exp(-0.5 * var * d * d);
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }
  return k;
}

double combine(const Neumaier& s1, const Neumaier& sa, const Neumaier& sb, const Neumaier& s3, std::size_t m) {
  const double md = static_cast<double>(m);
  const double m2 = md * md;
  const double t1 = s1.value() / m2;
  const double t2 = (sa.value() / m2) * (sb.value() / m2);
  const double t3 = s3.value() / (m2 * md);
  return t1 + t2 - 2.0 * t3;
}

std::vector<double> factorized_stored(std::span<const double> z, std::size_t h_max, const WeightMeasure& w) {
  const std::size_t n = z.size();
  const auto k1 = kernel_matrix(z, w.s_var());
  std::vector<double> k2_storage;
  if (w.t_var() != w.s_var()) k2_storage = kernel_matrix(z, w.t_var());
  const std::vector<double>& k2 = k2_storage.empty() ? k1 : k2_storage;

  std::vector<double> out(h_max + 1);
  for (std::size_t h = 0; h <= h_max; ++h) {
    const std::size_t m = n - h;
    Neumaier s1, sa, sb, s3;
    for (std::size_t j = 0; j < m; ++j) {
      const double* a = k1.data() + j * n;
      const double* b = k2.data() + (j + h) * n + h;
      double prod = 0.0;
      double ra = 0.0;
      double rb = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        prod += a[k] * b[k];
        ra += a[k];
        rb += b[k];
      }
      s1.add(prod);
      sa.add(ra);
      sb.add(rb);
      s3.add(ra * rb);
    }
    out[h] = combine(s1, sa, sb, s3, m);
  }
  return out;
}

std::vector<double> factorized_streaming(std::span<const double> z, std::size_t h_max, const WeightMeasure& w) {
  const std::size_t n = z.size();
  const double v1 = w.s_var();
  const double v2 = w.t_var();
  std::vector<double> out(h_max + 1);
  for (std::size_t h = 0; h <= h_max; ++h) {
    const std::size_t m = n - h;
    Neumaier s1, sa, sb, s3;
    for (std::size_t j = 0; j < m; ++j) {
      double prod = 0.0;
      double ra = 0.0;
      double rb = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double dx = z[j] - z[k];
        const double dy = z[j + h] - z[k + h];
        const double a = std::exp(-0.5 * v1 * dx * dx);
        const double b = std::exp(-0.5 * v2 * dy * dy);
        prod += a * b;
        ra += a;
        rb += b;
      }
      s1.add(prod);
      sa.add(ra);
      sb.add(rb);
      s3.add(ra * rb);
    }
    out[h] = combine(s1, sa, sb, s3, m);
  }
  return out;
}

double literal_lag(std::span<const double> z, std::size_t h, const WeightMeasure& w) {
  const std::size_t m = z.size() - h;
  auto x = [&](std::size_t i) { return z[i]; };
  auto y = [&](std::size_t i) { return z[i + h]; };
  Neumaier sum1, sum2, sum3;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      sum1.add(kernel_mu_hat(w, x(j) - x(k), y(j) - y(k)));
      for (std::size_t l = 0; l < m; ++l) {
        sum3.add(kernel_mu_hat(w, x(j) - x(k), y(j) - y(l)));
        for (std::size_t q = 0; q < m; ++q) sum2.add(kernel_mu_hat(w, x(j) - x(k), y(l) - y(q)));
      }
    }
  }
  const double md = static_cast<double>(m);
  return sum1.value() / (md * md) + sum2.value() / (md * md * md * md) - 2.0 * sum3.value() / (md * md * md);
}

void check_input(std::span<const double> z, std::size_t h_max) {
  if (z.size() < 2 || h_max + 1 >= z.size()) {
    throw ValidationError("ADCF needs h_max < length - 1 (h_max=" + std::to_string(h_max) +
                          ", length=" + std::to_string(z.size()) + ")");
  }
}

}  // namespace

WeightMeasure WeightMeasure::gaussian_product(double s_var, double t_var) {
  if (!(s_var > 0.0) || !(t_var > 0.0) || !std::isfinite(s_var) || !std::isfinite(t_var)) {
    throw ValidationError("gaussian product weight needs finite positive variances");
  }
  return WeightMeasure(s_var, t_var);
}

std::string WeightMeasure::label() const {
  return "gaussian_product(" + format_double(s_var_) + "," + format_double(t_var_) + ")";
}

double kernel_mu_hat(const WeightMeasure& w, double x, double y) {
  return std::exp(-0.5 * w.s_var() * x * x - 0.5 * w.t_var() * y * y);
}

std::vector<double> adcf_statistics(std::span<const double> z, std::size_t h_max, const WeightMeasure& w,
                                    AdcfMethod method) {
  check_input(z, h_max);
  if (method == AdcfMethod::literal) {
    std::vector<double> out(h_max + 1);
    for (std::size_t h = 0; h <= h_max; ++h) out[h] = literal_lag(z, h, w);
    return out;
  }
  if (z.size() <= kMatrixLimit) return factorized_stored(z, h_max, w);
  return factorized_streaming(z, h_max, w);
}

double adcf_statistic(std::span<const double> z, std::size_t h, const WeightMeasure& w, AdcfMethod method) {
  check_input(z, h);
  if (method == AdcfMethod::literal) return literal_lag(z, h, w);
  return adcf_statistics(z, h, w, method)[h];
}

AdcfReport adcf(std::span<const double> z, std::size_t h_max, const WeightMeasure& w, AdcfMethod method) {
  if (h_max == 0) throw ValidationError("ADCF needs h_max >= 1");
  const auto t = adcf_statistics(z, h_max, w, method);
  if (!(t[0] > 1e-300)) throw DegenerateInputError("ADCF undefined: T(0) = 0 for constant residuals");
  AdcfReport report;
  report.n_eff = z.size();
  report.T0 = t[0];
  for (std::size_t h = 1; h <= h_max; ++h) {
    report.lags.push_back(h);
    report.T.push_back(t[h]);
    report.R.push_back(t[h] / t[0]);
  }
  return report;
}

std::optional<double> default_adcf_critical_value(std::size_t h, const WeightMeasure& w) {
  if (!(w == WeightMeasure::gaussian_product(0.5, 0.5))) return std::nullopt;
  switch (h) {
    case 2:
      return 7.84;
    case 5:
      return 14.2;
    case 8:
      return 20.0;
    default:
      return std::nullopt;
  }
}

TestOutcome q_adcf(const AdcfReport& report, std::size_t h, double critical_value) {
  if (h == 0 || h > report.R.size()) {
    throw ValidationError("test lag h=" + std::to_string(h) + " exceeds the " + std::to_string(report.R.size()) +
                          " lags in the report");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < h; ++k) sum += report.R[k];
  TestOutcome out;
  out.name = "Q_ADCF";
  out.h = h;
  out.statistic = static_cast<double>(report.n_eff) * sum;
  out.df = std::numeric_limits<double>::quiet_NaN();
  out.critical_value = critical_value;
  out.reject = out.statistic > critical_value;
  return out;
}

TestOutcome q_adcf(const AdcfReport& report, std::size_t h, const WeightMeasure& w) {
  const auto cv = default_adcf_critical_value(h, w);
  if (!cv) {
    throw ValidationError("no Q_ADCF critical value for h=" + std::to_string(h) + " and weight " + w.label() +
                          "; run calibrate first");
  }
  return q_adcf(report, h, *cv);
}

AdcfCalibration calibrate_adcf_quantiles(const NoiseSpec& noise, std::size_t n, const std::vector<std::size_t>& hs,
                                         bool sum_form, const WeightMeasure& w, std::size_t reps,
                                         std::uint64_t seed, double level, unsigned workers) {
  if (reps < 200) throw ValidationError("calibration needs reps >= 200");
  if (hs.empty()) throw ValidationError("calibration needs at least one lag");
  if (!(level >= 0.0 && level <= 1.0)) throw ValidationError("calibration level must lie in [0, 1]");
  const std::size_t h_max = *std::max_element(hs.begin(), hs.end());
  if (h_max == 0) throw ValidationError("calibration lags must be >= 1");
  if (h_max + 1 >= n) throw ValidationError("calibration needs max lag < n - 1");

  std::vector<std::vector<double>> values(hs.size(), std::vector<double>(reps));
  parallel_for(reps, workers, [&](std::size_t r) {
    const auto z = sample(noise, n, seed ^ static_cast<std::uint64_t>(r));
    const auto report = adcf(z, h_max, w);
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const std::size_t h = hs[i];
      double v = 0.0;
      if (sum_form) {
        for (std::size_t k = 0; k < h; ++k) v += report.R[k];
      } else {
        v = report.R[h - 1];
      }
      values[i][r] = static_cast<double>(n) * v;
    }
  });

  AdcfCalibration out;
  out.noise = noise;
  out.weight = w;
  out.n = n;
  out.reps = reps;
  out.seed = seed;
  out.level = level;
  out.sum_form = sum_form;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    auto& v = values[i];
    std::sort(v.begin(), v.end());
    out.quantiles.push_back({hs[i], quantile_sorted(v, level), quantile_se_sorted(v, level)});
  }
  return out;
}

double calibrate_adcf_quantile(const NoiseSpec& noise, std::size_t n, std::size_t h, bool sum_form,
                               const WeightMeasure& w, std::size_t reps, std::uint64_t seed, double level,
                               unsigned workers) {
  return calibrate_adcf_quantiles(noise, n, {h}, sum_form, w, reps, seed, level, workers).quantiles.front().quantile;
}

void to_json(nlohmann::json& j, const WeightMeasure& w) {
  j = {{"kind", "gaussian_product"}, {"s_var", w.s_var()}, {"t_var", w.t_var()}};
}

WeightMeasure weight_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("weight must be an object");
  const std::string kind = j.value("kind", std::string("gaussian_product"));
  if (kind != "gaussian_product") throw ValidationError("unsupported weight kind '" + kind + "'");
  return WeightMeasure::gaussian_product(j.value("s_var", 0.5), j.value("t_var", 0.5));
}

void to_json(nlohmann::json& j, const AdcfReport& report) {
  j = {{"lags", report.lags}, {"T", report.T}, {"T0", report.T0}, {"R", report.R}, {"n_eff", report.n_eff}};
}

void to_json(nlohmann::json& j, const AdcfCalibration& c) {
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& q : c.quantiles) qs.push_back({{"h", q.h}, {"quantile", q.quantile}, {"quantile_se", q.quantile_se}});
  j = {{"weight", c.weight}, {"noise", c.noise}, {"n", c.n},         {"reps", c.reps},     {"seed", c.seed},
       {"level", c.level},   {"form", c.sum_form ? "sum" : "single"}, {"quantiles", qs}};
}

void write_adcf_csv(std::ostream& out, const AdcfReport& report) {
  out << "lag,T,R,n_times_R\n";
  out << 0 << ',' << format_double(report.T0) << ",1," << report.n_eff << '\n';
  for (std::size_t i = 0; i < report.lags.size(); ++i) {
    out << report.lags[i] << ',' << format_double(report.T[i]) << ',' << format_double(report.R[i]) << ','
        << format_double(static_cast<double>(report.n_eff) * report.R[i]) << '\n';
  }
}

}  // namespace splitfit
