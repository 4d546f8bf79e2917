#pragma once

#include <stdexcept>
#include <string>

namespace splitfit {

// Invalid parameters, configuration or arguments. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure inside a numerical routine (non-convergence, quadrature, singular
// systems). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that makes a statistic undefined, e.g. an all-zero residual vector.
class DegenerateInputError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace splitfit
