#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "matbern/error.hpp"
#include "matbern/symmat.hpp"

namespace matbern {

// Eigenvalues ascending; column i of `vectors` is the unit eigenvector of
// eigenvalues[i].
struct SpectralDecomp {
  std::vector<double> eigenvalues;
  SquareMatrix vectors;

  std::size_t dim() const noexcept { return eigenvalues.size(); }
};

namespace detail {

inline constexpr int kMaxJacobiSweeps = 100;
inline constexpr double kJacobiRelTol = 1e-13;

inline double off_diagonal_mass(const std::vector<double>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
  return std::sqrt(2.0 * s);
}

// Cyclic Jacobi on a row-major copy of a symmetric matrix. On return the
// diagonal of `a` holds the eigenvalues (unsorted) and, when `v` is
// non-null, its columns hold the accumulated rotations.
inline void jacobi_sweeps(std::vector<double>& a, std::size_t n, std::vector<double>* v,
                          double frobenius) {
  const double threshold = kJacobiRelTol * (1.0 + frobenius);
  double off = off_diagonal_mass(a, n);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off <= threshold) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a[p * n + p] -= t * apq;
        a[q * n + q] += t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          const double np = c * arp - s * arq;
          const double nq = s * arp + c * arq;
          a[r * n + p] = np;
          a[p * n + r] = np;
          a[r * n + q] = nq;
          a[q * n + r] = nq;
        }
        if (v != nullptr) {
          auto& vm = *v;
          for (std::size_t r = 0; r < n; ++r) {
            const double vrp = vm[r * n + p];
            const double vrq = vm[r * n + q];
            vm[r * n + p] = c * vrp - s * vrq;
            vm[r * n + q] = s * vrp + c * vrq;
          }
        }
      }
    }
    off = off_diagonal_mass(a, n);
  }
  if (off > threshold) {
    throw ConvergenceError("eig_sym: Jacobi did not converge in " + std::to_string(kMaxJacobiSweeps) +
                               " sweeps, off-diagonal mass " + std::to_string(off),
                           off);
  }
}

inline std::vector<std::size_t> ascending_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  return order;
}

}  // namespace detail

// Cyclic Jacobi eigendecomposition. Deterministic: identical input gives
// bit-identical output; ties keep Jacobi output order.
inline SpectralDecomp eig_sym(const SymMat& a) {
  const std::size_t n = a.dim();
  if (n == 0) throw DimensionError("eig_sym: empty matrix");
  std::vector<double> work(a.data().begin(), a.data().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  detail::jacobi_sweeps(work, n, &v, a.frobenius_norm());

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = work[i * n + i];
  const auto order = detail::ascending_order(diag);

  SpectralDecomp out;
  out.eigenvalues.resize(n);
  out.vectors = SquareMatrix(n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.eigenvalues[col] = diag[src];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, col) = v[r * n + src];
  }
  return out;
}

// Eigenvalues only (ascending); skips eigenvector accumulation.
inline std::vector<double> eigenvalues_sym(const SymMat& a) {
  const std::size_t n = a.dim();
  if (n == 0) throw DimensionError("eigenvalues_sym: empty matrix");
  std::vector<double> work(a.data().begin(), a.data().end());
  detail::jacobi_sweeps(work, n, nullptr, a.frobenius_norm());
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = work[i * n + i];
  std::stable_sort(diag.begin(), diag.end());
  return diag;
}

// Q * diag(values) * Q^T, assembled from the upper triangle so the result is
// exactly symmetric.
inline SymMat compose_spectral(const SquareMatrix& q, std::span<const double> values) {
  const std::size_t n = q.dim();
  if (values.size() != n) throw DimensionError("compose_spectral: size mismatch");
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * values[k] * q(j, k);
      out[i * n + j] = s;
      out[j * n + i] = s;
    }
  }
  return SymMat(n, std::move(out));
}

// f applied through the eigendecomposition.
template <class F>
SymMat apply_spectral(const SpectralDecomp& decomp, F&& f) {
  std::vector<double> mapped(decomp.eigenvalues.size());
  std::transform(decomp.eigenvalues.begin(), decomp.eigenvalues.end(), mapped.begin(), f);
  return compose_spectral(decomp.vectors, mapped);
}

template <class F>
SymMat apply_spectral(const SymMat& a, F&& f) {
  return apply_spectral(eig_sym(a), std::forward<F>(f));
}

inline SymMat mat_exp(const SymMat& a) {
  return apply_spectral(a, [](double x) { return std::exp(x); });
}

inline constexpr double kLogDomainCutoff = 1e-12;

inline SymMat mat_log(const SymMat& a) {
  const auto decomp = eig_sym(a);
  const double lmin = decomp.eigenvalues.front();
  if (!(lmin > kLogDomainCutoff)) {
    throw DomainError("mat_log: argument not positive definite, lambda_min = " + std::to_string(lmin));
  }
  return apply_spectral(decomp, [](double x) { return std::log(x); });
}

// Repeated product; p = 0 gives I.
inline SymMat mat_int_pow(const SymMat& a, unsigned p) {
  SymMat result = SymMat::identity(a.dim());
  for (unsigned i = 0; i < p; ++i) result = multiply_symmetric(result, a);
  return result;
}

inline double lambda_max(const SymMat& a) { return eigenvalues_sym(a).back(); }
inline double lambda_min(const SymMat& a) { return eigenvalues_sym(a).front(); }

inline double spectral_norm(const SymMat& a) {
  const auto ev = eigenvalues_sym(a);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

inline double trace(const SymMat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a(i, i);
  return s;
}

// tr e^A = sum of e^{lambda_i}.
inline double trace_exp(const SymMat& a) {
  double s = 0.0;
  for (double l : eigenvalues_sym(a)) s += std::exp(l);
  return s;
}

inline double default_psd_tol(const SymMat& a, const SymMat& b) {
  return 1e-10 * (1.0 + spectral_norm(a) + spectral_norm(b));
}

// Loewner order a <= b: lambda_min(b - a) >= -tol.
inline bool psd_order_leq(const SymMat& a, const SymMat& b, std::optional<double> tol = std::nullopt) {
  SymMat::require_same_dim(a, b, "psd_order_leq");
  const double eps = tol ? *tol : default_psd_tol(a, b);
  return lambda_min(b - a) >= -eps;
}

inline bool is_psd(const SymMat& a, double tol) { return lambda_min(a) >= -tol; }

}  // namespace matbern
