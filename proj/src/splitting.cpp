#include "splitfit/splitting.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "splitfit/error.hpp"

namespace splitfit {
namespace {

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError("invalid " + std::string(what) + ": \"" + std::string(text) + "\"");
  return value;
}

std::string format_number(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

SplitSpec::SplitSpec(std::size_t f, std::size_t l, std::size_t n) : f_(f), l_(l), n_(n) {
  if (f < 1 || f > n) throw ValidationError("split requires 1 <= f_n <= n (got f_n=" + std::to_string(f) + ", n=" + std::to_string(n) + ")");
  if (l < 1 || l > n) throw ValidationError("split requires 1 <= l_n <= n (got l_n=" + std::to_string(l) + ", n=" + std::to_string(n) + ")");
}

SplitSpec half_split(std::size_t n) {
  if (n < 2) throw ValidationError("half split needs n >= 2");
  return {n / 2, n, n};
}

SplitSpec full_split(std::size_t n) { return {n, n, n}; }

SplitCoefficients split_coefficients(const SplitSpec& split) {
  const double f = static_cast<double>(split.f());
  const double overlap = split.f() + split.l() > split.n() ? static_cast<double>(split.f() + split.l() - split.n()) : 0.0;
  return {static_cast<double>(split.l()) / f, overlap / f};
}

ModelKind ModelKind::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view orders = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  ModelKind kind;
  const auto comma = orders.find(',');
  if (name == "ar") {
    kind.family = Family::ar;
    kind.p = orders.empty() ? 1 : parse_count(orders, "AR order");
    kind.q = 0;
    if (kind.p == 0) throw ValidationError("AR order must be at least 1");
    return kind;
  }
  if (name == "arma" || name == "garch") {
    kind.family = name == "arma" ? Family::arma : Family::garch;
    if (orders.empty()) {
      kind.p = 1;
      kind.q = 1;
    } else {
      if (comma == std::string_view::npos) throw ValidationError("expected orders \"p,q\" in model \"" + std::string(text) + "\"");
      kind.p = parse_count(orders.substr(0, comma), "order p");
      kind.q = parse_count(orders.substr(comma + 1), "order q");
    }
    if (kind.family == Family::arma && kind.p + kind.q == 0) throw ValidationError("ARMA model needs p + q >= 1");
    if (kind.family == Family::garch && kind.p == 0) throw ValidationError("GARCH model needs p >= 1");
    return kind;
  }
  throw ValidationError("unknown model \"" + std::string(text) + "\" (expected ar:p, arma:p,q or garch:p,q)");
}

std::string ModelKind::to_string() const {
  switch (family) {
    case Family::ar:
      return "ar:" + std::to_string(p);
    case Family::arma:
      return "arma:" + std::to_string(p) + "," + std::to_string(q);
    case Family::garch:
      return "garch:" + std::to_string(p) + "," + std::to_string(q);
  }
  return "unknown";
}

FitResult fit_model(std::span<const double> x, const ModelKind& model, const FitOptions& options) {
  switch (model.family) {
    case ModelKind::Family::ar:
      return fit_ar_ls(x, model.p);
    case ModelKind::Family::arma:
      return fit_arma_pmle(x, model.p, model.q, std::nullopt, options.optim);
    case ModelKind::Family::garch:
      return fit_garch_qmle(x, model.p, model.q, options.garch_space, options.optim);
  }
  throw ValidationError("unsupported model family");
}

std::vector<double> model_residuals(std::span<const double> x, const FitResult& fit, std::size_t first,
                                    std::size_t last) {
  if (const auto* arma = std::get_if<ArmaParams>(&fit.estimate)) return arma_residuals_truncated(*arma, x, first, last);
  if (const auto* garch = std::get_if<GarchParams>(&fit.estimate)) return garch_residuals(*garch, x, first, last);
  throw ValidationError("fit result does not hold an ARMA or GARCH estimate");
}

SplitResiduals split_residuals(std::span<const double> x, const ModelKind& model, const SplitSpec& split,
                               const FitOptions& options) {
  if (split.n() != x.size()) throw ValidationError("split n does not match the series length");
  FitResult fit = fit_model(x.first(split.f()), model, options);
  auto z = model_residuals(x, fit, split.assessment_begin(), split.n());
  for (double value : z) {
    if (!std::isfinite(value)) throw NumericalError("non-finite residual");
  }
  return {std::move(z), std::move(fit), split};
}

SplitToken SplitToken::parse(std::string_view text) {
  if (text == "half") return {Kind::half, 0.0, 0.0};
  if (text == "full") return {Kind::full, 0.0, 0.0};
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ValidationError("split must be \"half\", \"full\" or \"f,l\"");
  // Parse as signed so "0,10" reports the violated bound rather than a syntax error.
  auto parse_signed = [&](std::string_view part) {
    long long value = 0;
    const auto* end = part.data() + part.size();
    const auto [ptr, ec] = std::from_chars(part.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ValidationError("invalid split \"" + std::string(text) + "\"");
    return value;
  };
  const long long f = parse_signed(text.substr(0, comma));
  const long long l = parse_signed(text.substr(comma + 1));
  if (f < 1) throw ValidationError("split requires f_n >= 1");
  if (l < 1) throw ValidationError("split requires l_n >= 1");
  return {Kind::absolute, static_cast<double>(f), static_cast<double>(l)};
}

SplitToken SplitToken::parse(const nlohmann::json& j) {
  if (j.is_string()) return parse(std::string_view(j.get_ref<const std::string&>()));
  if (!j.is_object()) throw ValidationError("split token must be a string or an object");
  if (j.contains("f_frac")) {
    const double f = j.at("f_frac").get<double>();
    const double l = j.value("l_frac", 1.0);
    if (!(f > 0.0 && f <= 1.0) || !(l > 0.0 && l <= 1.0)) throw ValidationError("split fractions must lie in (0, 1]");
    return {Kind::fraction, f, l};
  }
  if (!j.contains("f") || !j.contains("l")) throw ValidationError("split object needs \"f\" and \"l\"");
  const double f = j.at("f").get<double>();
  const double l = j.at("l").get<double>();
  if (!(f >= 1.0) || !(l >= 1.0)) throw ValidationError("split requires f_n >= 1 and l_n >= 1");
  return {Kind::absolute, std::floor(f), std::floor(l)};
}

SplitSpec SplitToken::resolve(std::size_t n) const {
  switch (kind) {
    case Kind::half:
      return half_split(n);
    case Kind::full:
      return full_split(n);
    case Kind::absolute:
      return {static_cast<std::size_t>(f), static_cast<std::size_t>(l), n};
    case Kind::fraction:
      return {std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(f * static_cast<double>(n)))),
              std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(l * static_cast<double>(n)))), n};
  }
  throw ValidationError("unsupported split token");
}

std::string SplitToken::label() const {
  switch (kind) {
    case Kind::half:
      return "half";
    case Kind::full:
      return "full";
    case Kind::absolute:
      return "f=" + format_number(f) + ";l=" + format_number(l);
    case Kind::fraction:
      return "f=" + format_number(f) + "n;l=" + format_number(l) + "n";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const SplitToken& token) {
  switch (token.kind) {
    case SplitToken::Kind::half:
      j = "half";
      break;
    case SplitToken::Kind::full:
      j = "full";
      break;
    case SplitToken::Kind::absolute:
      j = {{"f", token.f}, {"l", token.l}};
      break;
    case SplitToken::Kind::fraction:
      j = {{"f_frac", token.f}, {"l_frac", token.l}};
      break;
  }
}

}  // namespace splitfit
