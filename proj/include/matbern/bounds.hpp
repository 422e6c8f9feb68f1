#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "matbern/error.hpp"
#include "matbern/spectral.hpp"
#include "matbern/symmat.hpp"

namespace matbern {

// Parameters of the matrix-martingale Bernstein bound.
//   c: Bernstein constant, x: deviation per step, y: variance level per step,
//   n: horizon, d: matrix dimension, t: exponential tilt (optimal if unset).
struct BernsteinParams {
  double c = 1.0;
  double x = 1.0;
  double y = 1.0;
  int n = 1;
  int d = 1;
  std::optional<double> t;

  void validate() const;
};

inline void require_tilt(double t, double c) {
  if (!(t > 0.0) || !(c > 0.0) || !(c * t < 1.0)) {
    std::ostringstream os;
    os << "tilt violates 0<ct<1 (t=" << t << ", c=" << c << ", ct=" << c * t << ")";
    throw ParameterError(os.str());
  }
}

// t^2 / (2(1 - tc))
inline double tilt_coefficient(double t, double c) { return t * t / (2.0 * std::fma(-t, c, 1.0)); }

inline void BernsteinParams::validate() const {
  if (!(c > 0.0)) throw ParameterError("BernsteinParams: c must be positive");
  if (!(x > 0.0)) throw ParameterError("BernsteinParams: x must be positive");
  if (!(y > 0.0)) throw ParameterError("BernsteinParams: y must be positive");
  if (n < 1) throw ParameterError("BernsteinParams: n must be >= 1");
  if (d < 1) throw ParameterError("BernsteinParams: d must be >= 1");
  if (t) require_tilt(*t, c);
}

struct BoundReport {
  double bound_product_form = 0.0;  // d (1 + x^2/(2(y+cx)))^n exp(-n x^2/(y+cx))
  double bound_exp_form = 0.0;      // d exp(-n x^2 / (2(y+cx)))
  double bound_generic = 0.0;       // d exp(n (Lambda_y(t) - t x)) at t_used
  double t_used = 0.0;
  BernsteinParams params;
};

// Lambda_X(t) = log(I + t^2 X / (2(1 - tc))) for PSD X, evaluated per
// eigenvalue with log1p.
inline SymMat lambda_cap(const SymMat& x_mat, double t, double c) {
  require_tilt(t, c);
  const auto decomp = eig_sym(x_mat);
  const double lmin = decomp.eigenvalues.front();
  const double tol = 1e-10 * (1.0 + std::max(std::abs(lmin), std::abs(decomp.eigenvalues.back())));
  if (lmin < -tol) {
    throw DomainError("lambda_cap: argument not positive semidefinite, lambda_min = " +
                      std::to_string(lmin));
  }
  const double coef = tilt_coefficient(t, c);
  return apply_spectral(decomp, [coef](double v) { return std::log1p(coef * std::max(v, 0.0)); });
}

// Lambda_{(sA)^2}(t) from a precomputed decomposition of A: the eigenbasis of
// (sA)^2 is that of A with eigenvalues s^2 a_i^2.
inline SymMat lambda_cap_of_square(const SpectralDecomp& a, double scale, double t, double c) {
  require_tilt(t, c);
  const double coef = tilt_coefficient(t, c);
  const double s2 = scale * scale;
  return apply_spectral(a, [coef, s2](double v) { return std::log1p(coef * s2 * v * v); });
}

inline double scalar_lambda(double y, double t, double c) {
  require_tilt(t, c);
  if (!(y >= 0.0)) throw ParameterError("scalar_lambda: y must be nonnegative");
  return std::log1p(y * tilt_coefficient(t, c));
}

inline double optimal_t(double x, double y, double c) {
  if (!(x > 0.0) || !(y > 0.0) || !(c > 0.0)) {
    throw ParameterError("optimal_t: x, y, c must be positive");
  }
  return x / (y + c * x);
}

namespace detail {

inline void require_positive(double v, const char* name, const char* where) {
  if (!(v > 0.0)) throw ParameterError(std::string(where) + ": " + name + " must be positive");
}

// u = x^2 / (2(y + cx)); product form exponent n(log1p(u) - 2u), exp form -nu.
inline double bernstein_u(double x, double y, double c) { return x * x / (2.0 * (y + c * x)); }

// n (Lambda_y(t) - t x) in extended precision; an unset tilt is formed as
// x / (y + cx) at that precision.
inline double generic_exponent(double x, double y, double c, int n, std::optional<double> t) {
  using ld = long double;
  const ld lx = x, ly = y, lc = c;
  const ld lt = t ? static_cast<ld>(*t) : lx / (ly + lc * lx);
  const ld coef = lt * lt / (2.0L * (1.0L - lt * lc));
  return static_cast<double>(static_cast<ld>(n) * (std::log1p(ly * coef) - lt * lx));
}

}  // namespace detail

inline std::pair<double, double> scalar_martingale_bound(double x, double y, double c, int n) {
  detail::require_positive(x, "x", "scalar_martingale_bound");
  detail::require_positive(y, "y", "scalar_martingale_bound");
  detail::require_positive(c, "c", "scalar_martingale_bound");
  if (n < 1) throw ParameterError("scalar_martingale_bound: n must be >= 1");
  const double u = detail::bernstein_u(x, y, c);
  return {std::exp(n * (std::log1p(u) - 2.0 * u)), std::exp(-n * u)};
}

inline BoundReport martingale_matrix_bound(const BernsteinParams& params,
                                           std::optional<double> t = std::nullopt) {
  params.validate();
  BoundReport r;
  r.params = params;
  if (!t) t = params.t;
  r.t_used = t ? *t : optimal_t(params.x, params.y, params.c);
  require_tilt(r.t_used, params.c);

  const double log_d = std::log(static_cast<double>(params.d));
  const double u = detail::bernstein_u(params.x, params.y, params.c);
  r.bound_product_form = std::exp(log_d + params.n * (std::log1p(u) - 2.0 * u));
  r.bound_exp_form = std::exp(log_d - params.n * u);
  r.bound_generic =
      std::exp(log_d + detail::generic_exponent(params.x, params.y, params.c, params.n, t));
  return r;
}

// Classical scalar Bernstein bound for sums of independent variables, in the
// form exp(-sqrt(n) x^2 / (2 (sqrt(n) nu^2 + c x))).
inline double scalar_bernstein_bound(double x, double nu2, double c, int n) {
  detail::require_positive(x, "x", "scalar_bernstein_bound");
  detail::require_positive(c, "c", "scalar_bernstein_bound");
  if (!(nu2 >= 0.0)) throw ParameterError("scalar_bernstein_bound: nu2 must be nonnegative");
  if (n < 1) throw ParameterError("scalar_bernstein_bound: n must be >= 1");
  const double rn = std::sqrt(static_cast<double>(n));
  return std::exp(-rn * x * x / (2.0 * (rn * nu2 + c * x)));
}

// Matrix Bernstein for independent sums: d exp(-t^2 / (2(sigma^2 + r t / 3))).
inline double matrix_bernstein_indep_bound(double t, double sigma2, double r, int d) {
  if (!(t >= 0.0)) throw ParameterError("matrix_bernstein_indep_bound: t must be nonnegative");
  if (!(sigma2 >= 0.0)) throw ParameterError("matrix_bernstein_indep_bound: sigma2 must be nonnegative");
  detail::require_positive(r, "r", "matrix_bernstein_indep_bound");
  if (d < 1) throw ParameterError("matrix_bernstein_indep_bound: d must be >= 1");
  if (t == 0.0) return static_cast<double>(d);
  return std::exp(std::log(static_cast<double>(d)) - t * t / (2.0 * (sigma2 + r * t / 3.0)));
}

// p! c^(p-2) / 2
inline double bernstein_coefficient(int p, double c) {
  if (p < 2) throw ParameterError("bernstein_coefficient: p must be >= 2");
  double coef = 0.5;
  for (int k = 2; k <= p; ++k) coef *= k;
  return coef * std::pow(c, p - 2);
}

inline SymMat bernstein_rhs(const SymMat& v, int p, double c) {
  detail::require_positive(c, "c", "bernstein_rhs");
  return bernstein_coefficient(p, c) * v;
}

}  // namespace matbern
