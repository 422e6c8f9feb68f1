#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "matbern/bounds.hpp"
#include "matbern/error.hpp"
#include "matbern/rng.hpp"
#include "matbern/spectral.hpp"
#include "matbern/symmat.hpp"

namespace matbern {

// Increment laws, all of the form (scalar multiplier) * A_k:
//   rademacher_series  dM_k = eps_k A_k,            eps_k = +-1 equiprobable
//   gaussian_series    dM_k = g_k A_k,              g_k ~ N(0, 1)
//   state_scaled       dM_k = eps_k s(M_{k-1}) A_k, s predictable in [s_lo, s_hi]
enum class GeneratorKind { kRademacherSeries, kGaussianSeries, kStateScaled };

inline std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kRademacherSeries: return "rademacher_series";
    case GeneratorKind::kGaussianSeries: return "gaussian_series";
    case GeneratorKind::kStateScaled: return "state_scaled";
  }
  return "unknown";
}

inline std::optional<GeneratorKind> parse_generator_kind(std::string_view name) {
  if (name == "rademacher_series" || name == "rademacher") return GeneratorKind::kRademacherSeries;
  if (name == "gaussian_series" || name == "gaussian") return GeneratorKind::kGaussianSeries;
  if (name == "state_scaled") return GeneratorKind::kStateScaled;
  return std::nullopt;
}

// Immutable description of an increment law. The eigendecompositions and
// squares of the direction matrices are computed once and shared by copies.
class GeneratorSpec {
 public:
  GeneratorSpec(GeneratorKind kind, std::vector<SymMat> base_matrices, double s_lo = 1.0,
                double s_hi = 1.0)
      : kind_(kind), s_lo_(s_lo), s_hi_(s_hi) {
    if (base_matrices.empty()) throw DomainError("GeneratorSpec: empty base_matrices");
    const std::size_t d = base_matrices.front().dim();
    for (std::size_t k = 0; k < base_matrices.size(); ++k) {
      if (base_matrices[k].dim() != d) {
        throw DimensionError("GeneratorSpec: base matrix " + std::to_string(k + 1) +
                             " has dimension " + std::to_string(base_matrices[k].dim()) +
                             ", expected " + std::to_string(d));
      }
    }
    if (kind == GeneratorKind::kStateScaled) {
      if (!(s_lo > 0.0) || !(s_lo <= s_hi) || !(s_hi <= 1.0)) {
        throw ParameterError("GeneratorSpec: state_scaled requires 0 < s_lo <= s_hi <= 1");
      }
    } else {
      s_lo_ = s_hi_ = 1.0;
    }
    auto dirs = std::make_shared<std::vector<SpectralDecomp>>();
    auto squares = std::make_shared<std::vector<SymMat>>();
    dirs->reserve(base_matrices.size());
    squares->reserve(base_matrices.size());
    for (const auto& a : base_matrices) {
      dirs->push_back(eig_sym(a));
      squares->push_back(multiply_symmetric(a, a));
    }
    directions_ = std::move(dirs);
    squares_ = std::move(squares);
    base_ = std::make_shared<const std::vector<SymMat>>(std::move(base_matrices));
  }

  static GeneratorSpec rademacher(std::vector<SymMat> base) {
    return GeneratorSpec(GeneratorKind::kRademacherSeries, std::move(base));
  }
  static GeneratorSpec gaussian(std::vector<SymMat> base) {
    return GeneratorSpec(GeneratorKind::kGaussianSeries, std::move(base));
  }
  static GeneratorSpec state_scaled(std::vector<SymMat> base, double s_lo, double s_hi) {
    return GeneratorSpec(GeneratorKind::kStateScaled, std::move(base), s_lo, s_hi);
  }

  GeneratorKind kind() const noexcept { return kind_; }
  const std::vector<SymMat>& base_matrices() const noexcept { return *base_; }
  const SymMat& direction(int k) const { return (*base_)[static_cast<std::size_t>(k - 1)]; }
  const SymMat& direction_squared(int k) const { return (*squares_)[static_cast<std::size_t>(k - 1)]; }
  const SpectralDecomp& direction_decomp(int k) const {
    return (*directions_)[static_cast<std::size_t>(k - 1)];
  }
  const std::shared_ptr<const std::vector<SpectralDecomp>>& directions() const noexcept {
    return directions_;
  }
  std::size_t dim() const noexcept { return base_->front().dim(); }
  int horizon() const noexcept { return static_cast<int>(base_->size()); }
  double s_lo() const noexcept { return s_lo_; }
  double s_hi() const noexcept { return s_hi_; }

  // Predictable scale applied at a step whose pre-step state is `prev`:
  // s(M) = s_lo + (s_hi - s_lo) / (1 + lambda_max(M)^2) for state_scaled,
  // 1 otherwise.
  double scale(const SymMat& prev) const {
    if (kind_ != GeneratorKind::kStateScaled) return 1.0;
    if (s_lo_ == s_hi_) return s_hi_;
    const double l = lambda_max(prev);
    return s_lo_ + (s_hi_ - s_lo_) / (1.0 + l * l);
  }

  // The random scalar multiplying s * A_k.
  template <class Engine>
  double draw_multiplier(Engine& eng) const {
    return kind_ == GeneratorKind::kGaussianSeries ? standard_normal(eng) : rademacher_sign(eng);
  }

 private:
  GeneratorKind kind_;
  double s_lo_;
  double s_hi_;
  std::shared_ptr<const std::vector<SymMat>> base_;
  std::shared_ptr<const std::vector<SymMat>> squares_;
  std::shared_ptr<const std::vector<SpectralDecomp>> directions_;
};

// One realized trajectory. Index conventions: states[n] = M_n (n = 0..N);
// increments[n-1] = dM_n, pred_var_steps[n-1] = V_n, pred_var_cum[n-1] = sum_{k<=n} V_k.
struct MartingalePath {
  std::vector<SymMat> states;
  std::vector<SymMat> increments;
  std::vector<SymMat> pred_var_steps;
  std::vector<SymMat> pred_var_cum;
  // V_n = (scales[n-1] * A_n)^2 for generated paths; lets Lambda_{V_n} reuse
  // the direction eigenbasis. Empty for hand-built fixtures.
  std::vector<double> scales;
  std::shared_ptr<const std::vector<SpectralDecomp>> directions;

  std::size_t dim() const { return states.front().dim(); }
  int horizon() const noexcept { return static_cast<int>(increments.size()); }
  const SymMat& state(int n) const { return states[static_cast<std::size_t>(n)]; }
  const SymMat& pred_var(int n) const { return pred_var_steps[static_cast<std::size_t>(n - 1)]; }

  // Fixture path from explicit increments and predictable variations.
  static MartingalePath from_increments(std::vector<SymMat> increments,
                                        std::vector<SymMat> pred_var_steps) {
    if (increments.empty() || increments.size() != pred_var_steps.size()) {
      throw DimensionError("MartingalePath: need equally many increments and variations (>= 1)");
    }
    MartingalePath p;
    const std::size_t d = increments.front().dim();
    p.states.push_back(SymMat(d));
    for (std::size_t k = 0; k < increments.size(); ++k) {
      p.states.push_back(p.states.back() + increments[k]);
      p.pred_var_cum.push_back(k == 0 ? pred_var_steps[k] : p.pred_var_cum.back() + pred_var_steps[k]);
    }
    p.increments = std::move(increments);
    p.pred_var_steps = std::move(pred_var_steps);
    return p;
  }
};

// Step k of a path with seed `seed` draws from SplitMix64(derive_seed(seed, k)).
inline MartingalePath generate_path(const GeneratorSpec& spec, std::uint64_t seed,
                                    std::optional<int> steps = std::nullopt) {
  const int n_steps = steps ? *steps : spec.horizon();
  if (n_steps < 1 || n_steps > spec.horizon()) {
    throw ParameterError("generate_path: steps must lie in [1, horizon]");
  }
  MartingalePath p;
  const auto n = static_cast<std::size_t>(n_steps);
  p.states.reserve(n + 1);
  p.increments.reserve(n);
  p.pred_var_steps.reserve(n);
  p.pred_var_cum.reserve(n);
  p.scales.reserve(n);
  p.directions = spec.directions();
  p.states.push_back(SymMat(spec.dim()));
  for (int k = 1; k <= n_steps; ++k) {
    SplitMix64 eng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const SymMat& prev = p.states.back();
    const double s = spec.scale(prev);
    const double m = spec.draw_multiplier(eng);
    SymMat dm = (m * s) * spec.direction(k);
    SymMat v = (s * s) * spec.direction_squared(k);
    p.states.push_back(prev + dm);
    p.pred_var_cum.push_back(k == 1 ? v : p.pred_var_cum.back() + v);
    p.increments.push_back(std::move(dm));
    p.pred_var_steps.push_back(std::move(v));
    p.scales.push_back(s);
  }
  return p;
}

// Smallest c for which the Bernstein moment condition holds for every p >= 2:
// max_k s_hi ||A_k||.
inline double min_bernstein_c(const GeneratorSpec& spec) {
  double c = 0.0;
  for (const auto& d : *spec.directions()) {
    c = std::max(c, std::max(std::abs(d.eigenvalues.front()), std::abs(d.eigenvalues.back())));
  }
  return spec.s_hi() * c;
}

inline double double_factorial(int m) {
  double r = 1.0;
  for (int k = m; k > 1; k -= 2) r *= k;
  return r;
}

// E[(dM_k)^p | F_{k-1}] when the step scale equals `scale`.
inline SymMat conditional_moment(const GeneratorSpec& spec, int k, int p, double scale) {
  const std::size_t d = spec.dim();
  if (p % 2 == 1) return SymMat(d);
  const double factor =
      spec.kind() == GeneratorKind::kGaussianSeries ? double_factorial(p - 1) : 1.0;
  return (factor * std::pow(scale, p)) * mat_int_pow(spec.direction(k), static_cast<unsigned>(p));
}

// E[exp(t dM_k) | F_{k-1}] when the step scale equals `scale`:
// cosh(t s A_k) for sign multipliers, exp(t^2 s^2 A_k^2 / 2) for Gaussian.
inline SymMat conditional_mgf(const GeneratorSpec& spec, int k, double t, double scale) {
  const auto& decomp = spec.direction_decomp(k);
  const double ts = t * scale;
  if (spec.kind() == GeneratorKind::kGaussianSeries) {
    return apply_spectral(decomp, [ts](double a) { return std::exp(0.5 * ts * ts * a * a); });
  }
  return apply_spectral(decomp, [ts](double a) { return std::cosh(ts * a); });
}

struct ConditionViolation {
  int step = 0;
  int p = 0;
  double lambda_min = 0.0;  // of rhs - moment
};

struct ConditionReport {
  int checks = 0;
  double worst_lambda_min = 0.0;
  std::vector<ConditionViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

// Exact check of E[(dM_k)^p | F_{k-1}] <= (p! c^(p-2) / 2) V_k for every
// step and 2 <= p <= p_max. state_scaled is evaluated at s_hi, where the
// ratio s^(p-2) of the two sides is largest.
inline ConditionReport check_bernstein_condition(const GeneratorSpec& spec, double c, int p_max) {
  if (p_max < 2) throw ParameterError("check_bernstein_condition: p_max must be >= 2");
  if (!(c > 0.0)) throw ParameterError("check_bernstein_condition: c must be positive");
  ConditionReport report;
  report.worst_lambda_min = std::numeric_limits<double>::infinity();
  const double s = spec.kind() == GeneratorKind::kStateScaled ? spec.s_hi() : 1.0;
  for (int k = 1; k <= spec.horizon(); ++k) {
    const SymMat v = (s * s) * spec.direction_squared(k);
    for (int p = 2; p <= p_max; ++p) {
      const SymMat moment = conditional_moment(spec, k, p, s);
      const SymMat rhs = bernstein_rhs(v, p, c);
      const double slack = lambda_min(rhs - moment);
      ++report.checks;
      report.worst_lambda_min = std::min(report.worst_lambda_min, slack);
      if (!psd_order_leq(moment, rhs)) report.violations.push_back({k, p, slack});
    }
  }
  return report;
}

}  // namespace matbern
