#include "splitfit/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace splitfit {
namespace {

// Reciprocal roots of 1 + sum c_k z^k are the eigenvalues of the companion
// matrix with first row (-c_1, ..., -c_k).
Eigen::VectorXcd reciprocal_roots(std::span<const double> coeffs) {
  std::size_t degree = coeffs.size();
  while (degree > 0 && coeffs[degree - 1] == 0.0) --degree;
  if (degree == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree), static_cast<Eigen::Index>(degree));
  for (std::size_t k = 0; k < degree; ++k) companion(0, static_cast<Eigen::Index>(k)) = -coeffs[k];
  for (std::size_t k = 1; k < degree; ++k) companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues();
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
  const Eigen::VectorXcd inv = reciprocal_roots(coeffs);
  std::vector<std::complex<double>> roots;
  roots.reserve(static_cast<std::size_t>(inv.size()));
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (std::abs(inv(i)) > 0.0) roots.push_back(1.0 / inv(i));
  }
  return roots;
}

double min_root_modulus(std::span<const double> coeffs) {
  const Eigen::VectorXcd inv = reciprocal_roots(coeffs);
  double largest = 0.0;
  for (Eigen::Index i = 0; i < inv.size(); ++i) largest = std::max(largest, std::abs(inv(i)));
  return largest == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / largest;
}

}  // namespace splitfit
