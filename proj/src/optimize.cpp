#include "splitfit/optimize.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace splitfit {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

OptimResult minimize_bfgs(const GradientObjective& objective, std::vector<double> x0, const OptimOptions& options) {
  const auto dim = static_cast<Eigen::Index>(x0.size());
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(x0.data(), dim);
  Eigen::VectorXd g(dim);
  Eigen::VectorXd g_new(dim);
  Eigen::VectorXd x_new(dim);

  auto evaluate = [&](const Eigen::VectorXd& at, Eigen::VectorXd& grad) {
    return objective(std::span<const double>(at.data(), static_cast<std::size_t>(dim)),
                     std::span<double>(grad.data(), static_cast<std::size_t>(dim)));
  };

  OptimResult result;
  double f = evaluate(x, g);
  if (!std::isfinite(f) || !g.allFinite()) {
    result.x = x0;
    result.value = f;
    return result;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(dim, dim);
  bool identity = true;
  bool converged = false;
  std::size_t iter = 0;

  while (iter < options.max_iter) {
    if (max_abs(g) < options.grad_tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd d = -H * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      identity = true;
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    if (identity) step = std::min(1.0, 1.0 / std::max(1e-12, std::sqrt(d.squaredNorm())));
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      x_new = x + step * d;
      f_new = evaluate(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (!identity) {
        H.setIdentity();
        identity = true;
        continue;
      }
      // No descent possible along the gradient: we are at a stationary
      // point up to the accuracy of the objective.
      converged = max_abs(g) < 1e-3 * std::max(1.0, std::abs(f));
      break;
    }

    ++iter;
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double f_old = f;
    x = x_new;
    g = g_new;
    f = f_new;
    result.trace.push_back(f);

    const double sy = s.dot(y);
    if (sy > 1e-12 * std::sqrt(s.squaredNorm() * y.squaredNorm())) {
      if (identity) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
      identity = false;
    }

    const double scale = std::max({std::abs(f_old), std::abs(f), 1.0});
    if (std::abs(f_old - f) <= options.rel_tol * scale) {
      converged = true;
      break;
    }
  }

  result.x.assign(x.data(), x.data() + dim);
  result.value = f;
  result.iterations = iter;
  result.converged = converged;
  return result;
}

OptimResult minimize_bfgs_numeric(const PlainObjective& objective, std::vector<double> x0,
                                  const OptimOptions& options) {
  auto with_gradient = [&](std::span<const double> x, std::span<double> grad) {
    const double f = objective(x);
    if (!std::isfinite(f)) return f;
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      probe[i] = x[i] + h;
      const double up = objective(probe);
      probe[i] = x[i] - h;
      const double down = objective(probe);
      probe[i] = x[i];
      grad[i] = (up - down) / (2.0 * h);
    }
    return f;
  };
  return minimize_bfgs(with_gradient, std::move(x0), options);
}

}  // namespace splitfit
