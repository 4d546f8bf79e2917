#include "splitfit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "splitfit/error.hpp"
#include "splitfit/polynomial.hpp"

namespace splitfit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxPartialCorrelation = 1.0 - 1e-7;
constexpr double kBoundaryRootMargin = 1e-6;

// ---------------------------------------------------------------------------
// Least squares helpers

struct LeastSquares {
  Eigen::VectorXd coef;
  double rss = 0.0;
  std::size_t rows = 0;
};

// Solves the normal equations; nullopt when X'X is numerically singular.
std::optional<LeastSquares> solve_normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd xty = X.transpose() * y;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd diag = ldlt.vectorD().cwiseAbs();
  if (diag.size() > 0 && !(diag.minCoeff() > 1e-12 * std::max(1.0, diag.maxCoeff()))) return std::nullopt;
  LeastSquares out;
  out.coef = ldlt.solve(xty);
  out.rss = (y - X * out.coef).squaredNorm();
  out.rows = static_cast<std::size_t>(y.size());
  return out;
}

// Regression of x_j on its p lags over j = start..n-1.
std::optional<LeastSquares> ar_regression(std::span<const double> x, std::size_t p, std::size_t start) {
  const std::size_t rows = x.size() - start;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t j = start + r;
    y(static_cast<Eigen::Index>(r)) = x[j];
    for (std::size_t k = 1; k <= p; ++k) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k - 1)) = x[j - k];
  }
  return solve_normal_equations(X, y);
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

std::optional<ArmaParams> try_arma(std::vector<double> phi, std::vector<double> theta) {
  try {
    return ArmaParams(std::move(phi), std::move(theta));
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Partial-autocorrelation parameterization

// Durbin-Levinson map from partial autocorrelations to causal AR coefficients.
std::vector<double> pacf_to_ar(std::span<const double> r) {
  std::vector<double> a;
  a.reserve(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    std::vector<double> next(k + 1);
    next[k] = r[k];
    for (std::size_t j = 0; j < k; ++j) next[j] = a[j] - r[k] * a[k - 1 - j];
    a = std::move(next);
  }
  return a;
}

// Inverse (step-down) map; nullopt if the polynomial is not causal.
std::optional<std::vector<double>> ar_to_pacf(std::span<const double> coef) {
  std::vector<double> a(coef.begin(), coef.end());
  std::vector<double> r(a.size());
  for (std::size_t k = a.size(); k-- > 0;) {
    const double rk = a[k];
    if (!(std::abs(rk) < 1.0)) return std::nullopt;
    r[k] = rk;
    std::vector<double> prev(k);
    for (std::size_t j = 0; j < k; ++j) prev[j] = (a[j] + rk * a[k - 1 - j]) / (1.0 - rk * rk);
    a = std::move(prev);
  }
  return r;
}

struct ArmaCoefficients {
  std::vector<double> phi;
  std::vector<double> theta;
};

ArmaCoefficients unpack_arma(std::span<const double> u, std::size_t p, std::size_t q) {
  std::vector<double> r_ar(p);
  std::vector<double> r_ma(q);
  for (std::size_t k = 0; k < p; ++k) r_ar[k] = std::clamp(std::tanh(u[k]), -kMaxPartialCorrelation, kMaxPartialCorrelation);
  for (std::size_t k = 0; k < q; ++k) r_ma[k] = std::clamp(std::tanh(u[p + k]), -kMaxPartialCorrelation, kMaxPartialCorrelation);
  ArmaCoefficients out{pacf_to_ar(r_ar), pacf_to_ar(r_ma)};
  // theta(z) = 1 + sum theta_l z^l is invertible iff 1 - sum(-theta_l) z^l is causal.
  for (auto& t : out.theta) t = -t;
  return out;
}

std::vector<double> pack_arma(const ArmaParams& params) {
  std::vector<double> u;
  auto append = [&](std::span<const double> coef) {
    const auto r = ar_to_pacf(coef);
    for (std::size_t k = 0; k < coef.size(); ++k) {
      const double rk = r ? std::clamp((*r)[k], -0.99, 0.99) : 0.0;
      u.push_back(std::atanh(rk));
    }
  };
  append(params.phi());
  std::vector<double> neg_theta(params.theta());
  for (auto& t : neg_theta) t = -t;
  append(neg_theta);
  return u;
}

// ---------------------------------------------------------------------------
// Innovations algorithm

// Autocovariances gamma(0..max_lag) of the ARMA process with unit innovation
// variance.
std::optional<std::vector<double>> arma_autocovariance(std::span<const double> phi, std::span<const double> theta,
                                                       std::size_t max_lag) {
  const std::size_t p = phi.size();
  const std::size_t q = theta.size();
  auto theta_at = [&](std::size_t j) { return j == 0 ? 1.0 : (j <= q ? theta[j - 1] : 0.0); };

  std::vector<double> psi(q + 1, 0.0);
  for (std::size_t j = 0; j <= q; ++j) {
    double value = theta_at(j);
    for (std::size_t i = 1; i <= std::min(j, p); ++i) value += phi[i - 1] * psi[j - i];
    psi[j] = value;
  }
  auto rhs = [&](std::size_t k) {
    double value = 0.0;
    for (std::size_t j = k; j <= q; ++j) value += theta_at(j) * psi[j - k];
    return value;
  };

  const auto dim = static_cast<Eigen::Index>(p + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b(dim);
  for (std::size_t k = 0; k <= p; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    A(row, row) += 1.0;
    for (std::size_t r = 1; r <= p; ++r) {
      const auto col = static_cast<Eigen::Index>(k > r ? k - r : r - k);
      A(row, col) -= phi[r - 1];
    }
    b(row) = rhs(k);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd head = lu.solve(b);
  if (!head.allFinite()) return std::nullopt;

  std::vector<double> gamma(std::max(max_lag, p) + 1, 0.0);
  for (std::size_t k = 0; k <= p; ++k) gamma[k] = head(static_cast<Eigen::Index>(k));
  for (std::size_t k = p + 1; k < gamma.size(); ++k) {
    double value = k <= q ? rhs(k) : 0.0;
    for (std::size_t r = 1; r <= p; ++r) value += phi[r - 1] * gamma[k - r];
    gamma[k] = value;
  }
  if (!(gamma[0] > 0.0)) return std::nullopt;
  gamma.resize(max_lag + 1);
  return gamma;
}

struct InnovationsOutput {
  double weighted_ss;  // sum (X_j - Xhat_j)^2 / r_{j-1}
  double sum_log_r;
};

std::optional<InnovationsOutput> arma_innovations(std::span<const double> x, std::span<const double> phi,
                                                  std::span<const double> theta) {
  const std::size_t p = phi.size();
  const std::size_t q = theta.size();
  const std::size_t m = std::max(p, q);
  const std::size_t N = x.size();
  auto theta_at = [&](std::size_t j) { return j == 0 ? 1.0 : (j <= q ? theta[j - 1] : 0.0); };

  const auto gamma_opt = arma_autocovariance(phi, theta, m + p + 1);
  if (!gamma_opt) return std::nullopt;
  const auto& gamma = *gamma_opt;
  auto gamma_abs = [&](std::ptrdiff_t h) { return gamma[static_cast<std::size_t>(h < 0 ? -h : h)]; };

  // kappa(i, j) of W_t = X_t (t <= m), W_t = phi(B) X_t (t > m); 1-based.
  auto kappa = [&](std::size_t i, std::size_t j) {
    const std::size_t lo = std::min(i, j);
    const std::size_t hi = std::max(i, j);
    const std::size_t d = hi - lo;
    if (hi <= m) return gamma_abs(static_cast<std::ptrdiff_t>(d));
    if (lo <= m) {
      if (hi > 2 * m) return 0.0;
      double value = gamma_abs(static_cast<std::ptrdiff_t>(d));
      for (std::size_t r = 1; r <= p; ++r) value -= phi[r - 1] * gamma_abs(static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(d));
      return value;
    }
    double value = 0.0;
    for (std::size_t r = 0; r + d <= q; ++r) value += theta_at(r) * theta_at(r + d);
    return value;
  };

  const std::size_t L = std::max<std::size_t>(m, 1);
  // th[n * (L + 1) + j] = theta_{n, j}, lag j = 1..L.
  std::vector<double> th(N * (L + 1), 0.0);
  std::vector<double> v(N, 0.0);
  auto theta_nj = [&](std::size_t n, std::size_t j) -> double& { return th[n * (L + 1) + j]; };

  v[0] = kappa(1, 1);
  if (!(v[0] > 0.0)) return std::nullopt;
  for (std::size_t n = 1; n < N; ++n) {
    const std::size_t k0 = n > L ? n - L : 0;
    for (std::size_t k = k0; k < n; ++k) {
      double value = kappa(n + 1, k + 1);
      for (std::size_t j = k0; j < k; ++j) value -= theta_nj(k, k - j) * theta_nj(n, n - j) * v[j];
      theta_nj(n, n - k) = value / v[k];
    }
    double vn = kappa(n + 1, n + 1);
    for (std::size_t j = k0; j < n; ++j) vn -= theta_nj(n, n - j) * theta_nj(n, n - j) * v[j];
    if (!(vn > 0.0) || !std::isfinite(vn)) return std::nullopt;
    v[n] = vn;
  }

  std::vector<double> innov(N, 0.0);  // X_j - Xhat_j
  InnovationsOutput out{0.0, 0.0};
  for (std::size_t t = 0; t < N; ++t) {
    // Predict X_{t+1} (1-based) from n = t observations.
    const std::size_t n = t;
    double pred = 0.0;
    if (n >= 1) {
      const std::size_t lags = n < m ? n : q;
      if (n >= m) {
        for (std::size_t i = 1; i <= p; ++i) pred += phi[i - 1] * x[t - i];
      }
      for (std::size_t j = 1; j <= lags; ++j) pred += theta_nj(n, j) * innov[t - j];
    }
    innov[t] = x[t] - pred;
    out.weighted_ss += innov[t] * innov[t] / v[n];
    out.sum_log_r += std::log(v[n]);
  }
  return out;
}

double arma_negative_profile_loglik(std::span<const double> x, std::span<const double> phi,
                                    std::span<const double> theta, double* sigma2_out = nullptr) {
  const auto innov = arma_innovations(x, phi, theta);
  if (!innov) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(x.size());
  const double sigma2 = innov->weighted_ss / n;
  if (!(sigma2 > 0.0)) return std::numeric_limits<double>::infinity();
  if (sigma2_out) *sigma2_out = sigma2;
  return 0.5 * n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0) + 0.5 * innov->sum_log_r;
}

// ---------------------------------------------------------------------------
// GARCH parameter mapping

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double s) { return std::log(s / (1.0 - s)); }

struct GarchMapping {
  std::size_t p;
  std::size_t q;
  GarchSpace space;

  double beta_mass() const { return space.rho0 - static_cast<double>(q) * space.lower; }

  // theta = (omega, alpha..., beta...) and d theta_i / d u_j.
  std::vector<double> to_params(std::span<const double> u, Eigen::MatrixXd* jacobian = nullptr) const {
    const std::size_t dim = 1 + p + q;
    std::vector<double> theta(dim);
    const double width = space.upper - space.lower;
    if (jacobian) jacobian->setZero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i <= p; ++i) {
      const double s = logistic(u[i]);
      theta[i] = space.lower + width * s;
      if (jacobian) (*jacobian)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = width * s * (1.0 - s);
    }
    if (q > 0) {
      const auto w = beta_weights(u.subspan(1 + p));
      for (std::size_t l = 0; l < q; ++l) {
        theta[1 + p + l] = space.lower + beta_mass() * w[l];
        if (jacobian) {
          for (std::size_t k = 0; k < q; ++k) {
            const double dw = w[l] * ((l == k ? 1.0 : 0.0) - w[k]);
            (*jacobian)(static_cast<Eigen::Index>(1 + p + l), static_cast<Eigen::Index>(1 + p + k)) = beta_mass() * dw;
          }
        }
      }
    }
    return theta;
  }

  // Softmax with an implicit slack component fixed at logit 0.
  std::vector<double> beta_weights(std::span<const double> y) const {
    const double top = std::max(0.0, *std::max_element(y.begin(), y.end()));
    double denom = std::exp(-top);
    std::vector<double> w(y.size());
    for (std::size_t l = 0; l < y.size(); ++l) {
      w[l] = std::exp(y[l] - top);
      denom += w[l];
    }
    for (auto& value : w) value /= denom;
    return w;
  }

  std::vector<double> from_params(std::span<const double> theta) const {
    std::vector<double> u(1 + p + q);
    const double width = space.upper - space.lower;
    for (std::size_t i = 0; i <= p; ++i) {
      const double s = std::clamp((theta[i] - space.lower) / width, 1e-9, 1.0 - 1e-9);
      u[i] = logit(s);
    }
    if (q > 0) {
      std::vector<double> w(q);
      double total = 0.0;
      for (std::size_t l = 0; l < q; ++l) {
        w[l] = std::max(1e-9, (theta[1 + p + l] - space.lower) / beta_mass());
        total += w[l];
      }
      if (total > 1.0 - 1e-6) {
        for (auto& value : w) value *= (1.0 - 1e-6) / total;
        total = 1.0 - 1e-6;
      }
      const double slack = 1.0 - total;
      for (std::size_t l = 0; l < q; ++l) u[1 + p + l] = std::log(w[l] / slack);
    }
    return u;
  }

  bool on_boundary(std::span<const double> u) const {
    constexpr double eps = 1e-6;
    for (std::size_t i = 0; i <= p; ++i) {
      const double s = logistic(u[i]);
      if (s < eps || s > 1.0 - eps) return true;
    }
    if (q > 0) {
      const auto w = beta_weights(u.subspan(1 + p));
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      if (1.0 - total < eps) return true;
      if (std::any_of(w.begin(), w.end(), [&](double value) { return value < eps; })) return true;
    }
    return false;
  }
};

// Quasi log-likelihood and its gradient in (omega, alpha, beta) for raw
// coefficient vectors, without constructing GarchParams.
double garch_loglik_raw(std::span<const double> x, std::span<const double> theta, std::size_t p, std::size_t q,
                        std::vector<double>* gradient) {
  const double omega = theta[0];
  const auto alpha = theta.subspan(1, p);
  const auto beta = theta.subspan(1 + p, q);
  const double bsum = std::accumulate(beta.begin(), beta.end(), 0.0);
  if (!(omega > 0.0) || !(bsum < 1.0)) return -std::numeric_limits<double>::infinity();
  const double c0 = omega / (1.0 - bsum);
  const std::size_t dim = 1 + p + q;
  const std::size_t N = x.size();

  std::vector<double> s2(N);
  std::vector<double> ds2(gradient ? N * dim : 0);
  std::vector<double> dc0(dim, 0.0);
  dc0[0] = 1.0 / (1.0 - bsum);
  for (std::size_t l = 0; l < q; ++l) dc0[1 + p + l] = omega / ((1.0 - bsum) * (1.0 - bsum));
  if (gradient) gradient->assign(dim, 0.0);

  double total = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    double var = omega;
    for (std::size_t k = 1; k <= p && k <= j; ++k) var += alpha[k - 1] * x[j - k] * x[j - k];
    for (std::size_t l = 1; l <= q; ++l) var += beta[l - 1] * (l <= j ? s2[j - l] : c0);
    s2[j] = var;
    const double x2 = x[j] * x[j];
    total += -0.5 * (std::log(var) + x2 / var);
    if (gradient) {
      double* dj = &ds2[j * dim];
      dj[0] = 1.0;
      for (std::size_t k = 1; k <= p; ++k) dj[k] = k <= j ? x[j - k] * x[j - k] : 0.0;
      for (std::size_t l = 1; l <= q; ++l) dj[p + l] = l <= j ? s2[j - l] : c0;
      for (std::size_t l = 1; l <= q; ++l) {
        const double b = beta[l - 1];
        if (l <= j) {
          const double* prev = &ds2[(j - l) * dim];
          for (std::size_t i = 0; i < dim; ++i) dj[i] += b * prev[i];
        } else {
          for (std::size_t i = 0; i < dim; ++i) dj[i] += b * dc0[i];
        }
      }
      const double weight = -0.5 * (1.0 / var - x2 / (var * var));
      for (std::size_t i = 0; i < dim; ++i) (*gradient)[i] += weight * dj[i];
    }
  }
  return std::isfinite(total) ? total : -std::numeric_limits<double>::infinity();
}

}  // namespace

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const FitResult& fit) {
  std::vector<double> flat;
  if (const auto* arma = std::get_if<ArmaParams>(&fit.estimate)) flat = arma->flat();
  if (const auto* garch = std::get_if<GarchParams>(&fit.estimate)) flat = garch->flat();
  j = nlohmann::json{{"estimate", flat},
                     {"loglik", fit.loglik},
                     {"converged", fit.converged},
                     {"iterations", fit.iterations},
                     {"boundary", fit.boundary}};
  if (std::isfinite(fit.sigma2)) {
    j["sigma2"] = fit.sigma2;
  } else {
    j["sigma2"] = nullptr;
  }
  j["model"] = fit.estimate;
}

FitResult fit_ar_ls(std::span<const double> x, std::size_t p) {
  if (p == 0) throw ValidationError("AR order must be at least 1");
  if (x.size() < 10 * p) throw ValidationError("least squares AR fit needs at least 10 * p observations");
  if (is_constant(x)) throw NumericalError("singular design: constant series");
  const auto ls = ar_regression(x, p, p);
  if (!ls) throw NumericalError("singular design in least squares AR fit");
  std::vector<double> phi(ls->coef.data(), ls->coef.data() + ls->coef.size());
  auto params = try_arma(phi, {});
  if (!params) throw NumericalError("least squares AR estimate is not causal");

  FitResult fit;
  fit.estimate = *params;
  const double m = static_cast<double>(ls->rows);
  fit.sigma2 = ls->rss / m;
  fit.loglik = -0.5 * m * (std::log(2.0 * std::numbers::pi * fit.sigma2) + 1.0);
  fit.converged = true;
  fit.boundary = params->min_root_modulus() < 1.0 + kBoundaryRootMargin;
  return fit;
}

ArmaLikelihood arma_gaussian_loglik(std::span<const double> x, const ArmaParams& params) {
  double sigma2 = kNaN;
  const double nll = arma_negative_profile_loglik(x, params.phi(), params.theta(), &sigma2);
  if (!std::isfinite(nll)) throw NumericalError("ARMA likelihood evaluation failed");
  return {-nll, sigma2};
}

ArmaParams hannan_rissanen(std::span<const double> x, std::size_t p, std::size_t q) {
  const std::vector<double> zeros_p(p, 0.0);
  const std::vector<double> zeros_q(q, 0.0);
  const ArmaParams fallback(zeros_p, zeros_q);
  const std::size_t n = x.size();
  if (is_constant(x)) return fallback;

  if (q == 0) {
    const auto ls = ar_regression(x, p, p);
    if (!ls) return fallback;
    return try_arma({ls->coef.data(), ls->coef.data() + ls->coef.size()}, {}).value_or(fallback);
  }

  const auto log_order = static_cast<std::size_t>(std::ceil(10.0 * std::log10(static_cast<double>(n))));
  const std::size_t long_order = std::clamp(log_order, p + q + 1, std::max<std::size_t>(p + q + 1, n / 5));
  const auto long_ar = ar_regression(x, long_order, long_order);
  if (!long_ar) return fallback;

  std::vector<double> proxy(n, 0.0);
  for (std::size_t j = long_order; j < n; ++j) {
    double value = x[j];
    for (std::size_t k = 1; k <= long_order; ++k) value -= long_ar->coef(static_cast<Eigen::Index>(k - 1)) * x[j - k];
    proxy[j] = value;
  }

  const std::size_t start = long_order + q;
  if (start + p + q + 1 >= n) return fallback;
  const std::size_t rows = n - start;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p + q));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t j = start + r;
    const auto row = static_cast<Eigen::Index>(r);
    y(row) = x[j];
    for (std::size_t k = 1; k <= p; ++k) X(row, static_cast<Eigen::Index>(k - 1)) = x[j - k];
    for (std::size_t l = 1; l <= q; ++l) X(row, static_cast<Eigen::Index>(p + l - 1)) = proxy[j - l];
  }
  const auto ls = solve_normal_equations(X, y);
  if (!ls) return fallback;
  std::vector<double> phi(p);
  std::vector<double> theta(q);
  for (std::size_t k = 0; k < p; ++k) phi[k] = ls->coef(static_cast<Eigen::Index>(k));
  for (std::size_t l = 0; l < q; ++l) theta[l] = ls->coef(static_cast<Eigen::Index>(p + l));
  return try_arma(phi, theta).value_or(fallback);
}

FitResult fit_arma_pmle(std::span<const double> x, std::size_t p, std::size_t q, std::optional<ArmaParams> init,
                        const OptimOptions& options) {
  if (p + q == 0) throw ValidationError("ARMA fit needs p + q >= 1");
  if (x.size() < 20 * (p + q)) throw ValidationError("ARMA fit needs at least 20 * (p + q) observations");
  if (is_constant(x)) throw NumericalError("singular design: constant series");
  if (init && (init->p() != p || init->q() != q)) throw ValidationError("ARMA initial value has the wrong orders");

  const ArmaParams start = init ? *init : hannan_rissanen(x, p, q);
  auto objective = [&](std::span<const double> u) {
    const auto coef = unpack_arma(u, p, q);
    return arma_negative_profile_loglik(x, coef.phi, coef.theta);
  };
  auto u0 = pack_arma(start);
  if (!std::isfinite(objective(u0))) u0.assign(p + q, 0.0);
  const auto opt = minimize_bfgs_numeric(objective, u0, options);

  const auto coef = unpack_arma(opt.x, p, q);
  auto params = try_arma(coef.phi, coef.theta);
  if (!params) throw NumericalError("ARMA estimate reached the unit circle");

  FitResult fit;
  const auto lik = arma_gaussian_loglik(x, *params);
  fit.estimate = *params;
  fit.sigma2 = lik.sigma2;
  fit.loglik = lik.loglik;
  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.boundary = params->min_root_modulus() < 1.0 + kBoundaryRootMargin;
  fit.loglik_trace.reserve(opt.trace.size());
  for (double value : opt.trace) fit.loglik_trace.push_back(-value);
  return fit;
}

double garch_quasi_loglik(std::span<const double> x, const GarchParams& params) {
  const auto theta = params.flat();
  return garch_loglik_raw(x, theta, params.p(), params.q(), nullptr);
}

std::vector<double> garch_quasi_loglik_gradient(std::span<const double> x, const GarchParams& params) {
  const auto theta = params.flat();
  std::vector<double> gradient;
  garch_loglik_raw(x, theta, params.p(), params.q(), &gradient);
  return gradient;
}

FitResult fit_garch_qmle(std::span<const double> x, std::size_t p, std::size_t q, const GarchSpace& space,
                         const OptimOptions& options) {
  if (p == 0) throw ValidationError("GARCH fit needs at least one ARCH coefficient (p >= 1)");
  if (!(space.lower > 0.0) || !(space.upper > space.lower) || !(space.rho0 > static_cast<double>(q) * space.lower) ||
      !(space.rho0 < 1.0)) {
    throw ValidationError("invalid GARCH parameter space bounds");
  }
  if (x.size() < 10 * (1 + p + q)) throw ValidationError("GARCH fit needs at least 10 * (1 + p + q) observations");
  if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
    throw NumericalError("singular design: all-zero series");
  }

  const GarchMapping mapping{p, q, space};
  const double mean_square =
      std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / static_cast<double>(x.size());

  std::vector<double> theta0(1 + p + q);
  theta0[0] = std::clamp(0.1 * mean_square, space.lower * 10.0, space.upper * 0.9);
  for (std::size_t k = 0; k < p; ++k) theta0[1 + k] = std::clamp(0.05, space.lower, space.upper);
  for (std::size_t l = 0; l < q; ++l) theta0[1 + p + l] = 0.8 / static_cast<double>(q);
  const double bsum = 0.8;
  if (q > 0 && bsum > space.rho0) {
    for (std::size_t l = 0; l < q; ++l) theta0[1 + p + l] *= 0.99 * space.rho0 / bsum;
  }

  const std::size_t dim = 1 + p + q;
  auto objective = [&](std::span<const double> u, std::span<double> grad) {
    Eigen::MatrixXd jac;
    const auto theta = mapping.to_params(u, &jac);
    std::vector<double> g;
    const double ll = garch_loglik_raw(x, theta, p, q, &g);
    if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
    const Eigen::Map<const Eigen::VectorXd> g_theta(g.data(), static_cast<Eigen::Index>(dim));
    const Eigen::VectorXd g_u = jac.transpose() * g_theta;
    for (std::size_t i = 0; i < dim; ++i) grad[i] = -g_u(static_cast<Eigen::Index>(i));
    return -ll;
  };
  const auto opt = minimize_bfgs(objective, mapping.from_params(theta0), options);

  const auto theta = mapping.to_params(opt.x);
  GarchParams params(theta[0], std::vector<double>(theta.begin() + 1, theta.begin() + 1 + static_cast<std::ptrdiff_t>(p)),
                     std::vector<double>(theta.begin() + 1 + static_cast<std::ptrdiff_t>(p), theta.end()));
  FitResult fit;
  fit.estimate = params;
  fit.sigma2 = kNaN;
  fit.loglik = garch_quasi_loglik(x, params);
  fit.converged = opt.converged && std::isfinite(fit.loglik);
  fit.iterations = opt.iterations;
  fit.boundary = mapping.on_boundary(opt.x);
  fit.loglik_trace.reserve(opt.trace.size());
  for (double value : opt.trace) fit.loglik_trace.push_back(-value);
  return fit;
}

}  // namespace splitfit
