#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "matbern/error.hpp"

namespace matbern {

// Dense square matrix, row-major. Used for eigenvector bases and scratch
// products; anything that is symmetric by meaning lives in SymMat.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim, 0.0) {}
  SquareMatrix(std::size_t dim, std::vector<double> entries)
      : dim_(dim), entries_(std::move(entries)) {
    if (entries_.size() != dim_ * dim_) {
      throw DimensionError("SquareMatrix: expected " + std::to_string(dim_ * dim_) +
                           " entries, got " + std::to_string(entries_.size()));
    }
  }

  static SquareMatrix identity(std::size_t dim) {
    SquareMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return entries_; }

  SquareMatrix transposed() const {
    SquareMatrix t(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.dim_ != b.dim_) throw DimensionError("SquareMatrix product: dimension mismatch");
    const std::size_t n = a.dim_;
    SquareMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : entries_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> entries_;
};

// Dense real symmetric matrix. Immutable after construction; every
// constructor validates finiteness and near-symmetry, then stores the exact
// symmetrization (A + A^T)/2.
class SymMat {
 public:
  SymMat() = default;

  explicit SymMat(std::size_t dim) : dim_(dim), entries_(dim * dim, 0.0) {
    if (dim == 0) throw DimensionError("SymMat: dimension must be positive");
  }

  // Row-major entries. Throws DomainError when an entry is non-finite or
  // |a_ij - a_ji| > 1e-12 * (1 + max|a|).
  SymMat(std::size_t dim, std::vector<double> entries) : dim_(dim), entries_(std::move(entries)) {
    if (dim == 0) throw DimensionError("SymMat: dimension must be positive");
    if (entries_.size() != dim * dim) {
      throw DimensionError("SymMat: expected " + std::to_string(dim * dim) + " entries, got " +
                           std::to_string(entries_.size()));
    }
    validate_and_symmetrize();
  }

  explicit SymMat(const SquareMatrix& m)
      : SymMat(m.dim(), std::vector<double>(m.data().begin(), m.data().end())) {}

  static SymMat identity(std::size_t dim) { return scaled_identity(dim, 1.0); }

  static SymMat scaled_identity(std::size_t dim, double value) {
    SymMat m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = value;
    return m;
  }

  static SymMat diagonal(std::span<const double> values) {
    SymMat m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m.at(i, i) = values[i];
    m.check_finite();
    return m;
  }
  static SymMat diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
  }

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return entries_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : entries_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : entries_) s += v * v;
    return std::sqrt(s);
  }

  SquareMatrix to_square() const {
    return SquareMatrix(dim_, entries_);
  }

  friend SymMat operator+(const SymMat& a, const SymMat& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
  }
  friend SymMat operator-(const SymMat& a, const SymMat& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
  }
  friend SymMat operator-(const SymMat& a) { return -1.0 * a; }
  friend SymMat operator*(double s, const SymMat& a) {
    SymMat r = a;
    for (double& v : r.entries_) v *= s;
    r.check_finite();
    return r;
  }
  friend SymMat operator*(const SymMat& a, double s) { return s * a; }

  friend bool operator==(const SymMat& a, const SymMat& b) = default;

  // Largest |a_ij - b_ij|; dimensions must agree.
  friend double max_abs_diff(const SymMat& a, const SymMat& b) {
    require_same_dim(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries_.size(); ++i)
      m = std::max(m, std::abs(a.entries_[i] - b.entries_[i]));
    return m;
  }

  static void require_same_dim(const SymMat& a, const SymMat& b, const char* where) {
    if (a.dim_ != b.dim_) {
      throw DimensionError(std::string(where) + ": dimension mismatch (" + std::to_string(a.dim_) +
                           " vs " + std::to_string(b.dim_) + ")");
    }
  }

 private:
  double& at(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }

  template <class Op>
  static SymMat combine(const SymMat& a, const SymMat& b, Op op) {
    require_same_dim(a, b, "SymMat arithmetic");
    SymMat r = a;
    for (std::size_t i = 0; i < r.entries_.size(); ++i) r.entries_[i] = op(a.entries_[i], b.entries_[i]);
    r.check_finite();
    return r;
  }

  void check_finite() const {
    for (double v : entries_) {
      if (!std::isfinite(v)) throw DomainError("SymMat: non-finite entry");
    }
  }

  void validate_and_symmetrize() {
    check_finite();
    const double tol = 1e-12 * (1.0 + max_abs());
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i + 1; j < dim_; ++j) {
        const double aij = at(i, j);
        const double aji = at(j, i);
        if (std::abs(aij - aji) > tol) {
          throw DomainError("SymMat: entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") differs from its transpose by " + std::to_string(std::abs(aij - aji)));
        }
        const double mid = 0.5 * (aij + aji);
        at(i, j) = mid;
        at(j, i) = mid;
      }
    }
  }

  std::size_t dim_ = 0;
  std::vector<double> entries_;
};

// a*b for symmetric a, b whose product is known to be symmetric (powers,
// commuting pairs). Result goes through the SymMat validation.
inline SymMat multiply_symmetric(const SymMat& a, const SymMat& b) {
  SymMat::require_same_dim(a, b, "multiply_symmetric");
  const std::size_t n = a.dim();
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b(k, j);
    }
  return SymMat(n, std::move(c));
}

}  // namespace matbern
