#pragma once

#include <complex>
#include <span>
#include <vector>

namespace splitfit {

/// Roots of 1 + c_1 z + ... + c_k z^k (trailing zero coefficients lower the
/// degree). Computed as reciprocals of the companion-matrix eigenvalues.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

/// Smallest root modulus of 1 + c_1 z + ... + c_k z^k; +inf for a constant
/// polynomial.
double min_root_modulus(std::span<const double> coeffs);

}  // namespace splitfit
