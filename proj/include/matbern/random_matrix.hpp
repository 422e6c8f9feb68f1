#pragma once

#include <cmath>
#include <vector>

#include "matbern/rng.hpp"
#include "matbern/spectral.hpp"
#include "matbern/symmat.hpp"

namespace matbern {

// Symmetric matrix with i.i.d. N(0, scale^2) entries on and above the diagonal.
template <class Engine>
SymMat random_symmetric(std::size_t dim, double scale, Engine& eng) {
  std::vector<double> e(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) {
      const double g = scale * standard_normal(eng);
      e[i * dim + j] = g;
      e[j * dim + i] = g;
    }
  return SymMat(dim, std::move(e));
}

// G^T G with G a dim x dim Gaussian matrix of entry scale `scale`.
template <class Engine>
SymMat random_psd(std::size_t dim, double scale, Engine& eng) {
  SquareMatrix g(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) g(i, j) = scale * standard_normal(eng);
  return SymMat(g.transposed() * g);
}

// Positive definite: random_psd + floor * I.
template <class Engine>
SymMat random_pd(std::size_t dim, double scale, double floor, Engine& eng) {
  return random_psd(dim, scale, eng) + SymMat::scaled_identity(dim, floor);
}

// Orthogonal matrix from modified Gram-Schmidt on a Gaussian matrix.
template <class Engine>
SquareMatrix random_orthogonal(std::size_t dim, Engine& eng) {
  for (;;) {
    SquareMatrix q(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) q(i, j) = standard_normal(eng);
    bool ok = true;
    for (std::size_t col = 0; col < dim && ok; ++col) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t prev = 0; prev < col; ++prev) {
          double dot = 0.0;
          for (std::size_t r = 0; r < dim; ++r) dot += q(r, prev) * q(r, col);
          for (std::size_t r = 0; r < dim; ++r) q(r, col) -= dot * q(r, prev);
        }
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < dim; ++r) norm += q(r, col) * q(r, col);
      norm = std::sqrt(norm);
      if (norm < 1e-8) {
        ok = false;
        break;
      }
      for (std::size_t r = 0; r < dim; ++r) q(r, col) /= norm;
    }
    if (ok) return q;
  }
}

// Q diag(spectrum) Q^T with spectrum uniform on [lo, hi] and Q random orthogonal.
template <class Engine>
SymMat random_with_spectrum(std::size_t dim, double lo, double hi, Engine& eng) {
  std::vector<double> spectrum(dim);
  for (double& s : spectrum) s = lo + (hi - lo) * uniform01(eng);
  return compose_spectral(random_orthogonal(dim, eng), spectrum);
}

}  // namespace matbern
