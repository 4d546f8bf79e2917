#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace splitfit {

struct OptimOptions {
  /// Stop when |f_k - f_{k+1}| <= rel_tol * max(|f_k|, |f_{k+1}|, 1).
  double rel_tol = 1e-9;
  std::size_t max_iter = 500;
  /// Stop when the gradient's max-norm drops below this.
  double grad_tol = 1e-10;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Objective value after each accepted step (nonincreasing).
  std::vector<double> trace;
};

/// Objective that writes its gradient into the second argument.
using GradientObjective = std::function<double(std::span<const double>, std::span<double>)>;
using PlainObjective = std::function<double(std::span<const double>)>;

/// Unconstrained BFGS minimization with an Armijo backtracking line search.
/// Non-finite objective values are treated as infeasible and backtracked from.
OptimResult minimize_bfgs(const GradientObjective& objective, std::vector<double> x0, const OptimOptions& options = {});

/// As above with central-difference gradients.
OptimResult minimize_bfgs_numeric(const PlainObjective& objective, std::vector<double> x0,
                                  const OptimOptions& options = {});

}  // namespace splitfit
