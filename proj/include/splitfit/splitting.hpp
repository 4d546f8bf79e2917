#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "splitfit/estimators.hpp"

namespace splitfit {

/// Analysis split X_1..X_f (used for estimation) and assessment split
/// X_{n-l+1}..X_n (where residuals are evaluated).
class SplitSpec {
 public:
  SplitSpec(std::size_t f, std::size_t l, std::size_t n);

  std::size_t f() const noexcept { return f_; }
  std::size_t l() const noexcept { return l_; }
  std::size_t n() const noexcept { return n_; }

  /// 0-based index of the first assessment observation, n - l.
  std::size_t assessment_begin() const noexcept { return n_ - l_; }

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;

 private:
  std::size_t f_;
  std::size_t l_;
  std::size_t n_;
};

struct SplitCoefficients {
  double k_ra;  // l / f
  double k_ov;  // max(0, f + l - n) / f
};

/// f = floor(n / 2), l = n: the regime k_ra = 2 k_ov.
SplitSpec half_split(std::size_t n);
/// f = l = n.
SplitSpec full_split(std::size_t n);

SplitCoefficients split_coefficients(const SplitSpec& split);

/// Model fitted on the analysis split.
struct ModelKind {
  enum class Family { ar, arma, garch };
  Family family = Family::ar;
  std::size_t p = 1;
  std::size_t q = 0;

  /// "ar:1", "arma:2,1", "garch:1,1".
  static ModelKind parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const ModelKind&, const ModelKind&) = default;
};

struct FitOptions {
  GarchSpace garch_space;
  OptimOptions optim;
};

struct SplitResiduals {
  std::vector<double> z_hat;  // residuals at times n-l+1..n
  FitResult fit;
  SplitSpec split;
};

/// Fits `model` on x[1..f] only, then evaluates the truncated residuals at
/// the assessment times using the whole observed past x[1..j].
SplitResiduals split_residuals(std::span<const double> x, const ModelKind& model, const SplitSpec& split,
                               const FitOptions& options = {});

/// Fits the model to the whole input (used by split_residuals on x[1..f]).
FitResult fit_model(std::span<const double> x, const ModelKind& model, const FitOptions& options = {});

/// Residuals of x under a fitted model for 0-based times [first, last).
std::vector<double> model_residuals(std::span<const double> x, const FitResult& fit, std::size_t first,
                                    std::size_t last);

/// Split description independent of n: `half`, `full`, absolute counts, or
/// fractions of n.
struct SplitToken {
  enum class Kind { half, full, absolute, fraction };
  Kind kind = Kind::half;
  double f = 0.0;
  double l = 0.0;

  /// Accepts "half", "full", "f,l", {"f":..,"l":..} and
  /// {"f_frac":..,"l_frac":..} (l defaults to n / 1.0).
  static SplitToken parse(const nlohmann::json& j);
  static SplitToken parse(std::string_view text);

  SplitSpec resolve(std::size_t n) const;
  std::string label() const;
};

void to_json(nlohmann::json& j, const SplitToken& token);

}  // namespace splitfit
