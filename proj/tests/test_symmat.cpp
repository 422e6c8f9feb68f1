#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "matbern/random_matrix.hpp"
#include "matbern/spectral.hpp"
#include "oracles.hpp"

using namespace matbern;

namespace {

double orthonormality_residual(const SquareMatrix& q) {
  const auto qtq = q.transposed() * q;
  double m = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i)
    for (std::size_t j = 0; j < q.dim(); ++j) m = std::max(m, std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)));
  return m;
}

}  // namespace

TEST(SymMat, RejectsAsymmetricAndNonFinite) {
  EXPECT_THROW(SymMat(2, {1.0, 2.0, 3.0, 4.0}), DomainError);
  EXPECT_THROW(SymMat(2, {1.0, std::nan(""), std::nan(""), 1.0}), DomainError);
  EXPECT_THROW(SymMat(2, {1.0, 2.0, 2.0}), DimensionError);
  EXPECT_THROW(SymMat(0), DimensionError);
}

TEST(SymMat, SymmetrizesRoundoffLevelAsymmetry) {
  const SymMat a(2, {1.0, 0.5 + 1e-15, 0.5 - 1e-15, 2.0});
  EXPECT_EQ(a(0, 1), a(1, 0));
  EXPECT_DOUBLE_EQ(a(0, 1), 0.5);
}

TEST(EigSym, DiagonalInput) {
  const auto e = eig_sym(SymMat::diagonal({3.0, 1.0}));
  EXPECT_EQ(e.eigenvalues, (std::vector<double>{1.0, 3.0}));
  // Columns are the swapped identity columns.
  EXPECT_EQ(std::abs(e.vectors(1, 0)), 1.0);
  EXPECT_EQ(std::abs(e.vectors(0, 1)), 1.0);
  EXPECT_EQ(e.vectors(0, 0), 0.0);
}

TEST(EigSym, Identity) {
  const auto e = eig_sym(SymMat::identity(4));
  EXPECT_EQ(e.eigenvalues, (std::vector<double>{1.0, 1.0, 1.0, 1.0}));
}

TEST(EigSym, TwoByTwoMatchesCharacteristicPolynomial) {
  const auto [lo, hi] = oracle::eig2(2.0, 1.0, 2.0);
  ASSERT_DOUBLE_EQ(lo, 1.0);
  ASSERT_DOUBLE_EQ(hi, 3.0);
  const auto e = eig_sym(SymMat(2, {2.0, 1.0, 1.0, 2.0}));
  EXPECT_NEAR(e.eigenvalues[0], lo, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1], hi, 1e-14);
}

TEST(EigSym, RandomTwoByTwoAgainstClosedForm) {
  SplitMix64 eng(11);
  for (int i = 0; i < 1000; ++i) {
    const SymMat a = random_symmetric(2, 2.0, eng);
    const auto [lo, hi] = oracle::eig2(a(0, 0), a(0, 1), a(1, 1));
    const auto ev = eigenvalues_sym(a);
    EXPECT_NEAR(ev[0], lo, 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)));
    EXPECT_NEAR(ev[1], hi, 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)));
  }
}

TEST(EigSym, Deterministic) {
  SplitMix64 eng(5);
  const SymMat a = random_symmetric(6, 1.0, eng);
  const auto e1 = eig_sym(a);
  const auto e2 = eig_sym(a);
  EXPECT_EQ(e1.eigenvalues, e2.eigenvalues);
  EXPECT_TRUE(std::equal(e1.vectors.data().begin(), e1.vectors.data().end(), e2.vectors.data().begin()));
}

TEST(EigSym, ReconstructionAndOrthonormalityOnRandomMatrices) {
  SplitMix64 eng(2024);
  double worst_orth = 0.0, worst_rec = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(i % 8);
    const SymMat a = random_symmetric(d, 1.0 + (i % 5), eng);
    const auto e = eig_sym(a);
    ASSERT_TRUE(std::is_sorted(e.eigenvalues.begin(), e.eigenvalues.end()));
    const double rho = std::max(std::abs(e.eigenvalues.front()), std::abs(e.eigenvalues.back()));
    worst_orth = std::max(worst_orth, orthonormality_residual(e.vectors));
    worst_rec = std::max(worst_rec, max_abs_diff(compose_spectral(e.vectors, e.eigenvalues), a) / (1.0 + rho));
  }
  EXPECT_LE(worst_orth, 1e-10);
  EXPECT_LE(worst_rec, 1e-9);
}

TEST(EigSym, EigenvaluesOnlyAgreesWithFullDecomposition) {
  SplitMix64 eng(8);
  for (int i = 0; i < 200; ++i) {
    const SymMat a = random_symmetric(5, 1.0, eng);
    const auto full = eig_sym(a).eigenvalues;
    const auto vals = eigenvalues_sym(a);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(full[k], vals[k], 1e-12);
  }
}

TEST(MatExp, ZeroGivesIdentity) { EXPECT_EQ(mat_exp(SymMat(3)), SymMat::identity(3)); }

TEST(MatExp, DiagonalMatchesScalarExp) {
  const auto e = mat_exp(SymMat::diagonal({std::log(2.0), 0.0}));
  EXPECT_NEAR(e(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(e(1, 1), 1.0, 1e-15);
  EXPECT_EQ(e(0, 1), 0.0);
}

TEST(MatExp, MatchesPowerSeries) {
  SplitMix64 eng(99);
  for (int i = 0; i < 500; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(i % 6);
    const SymMat a = random_with_spectrum(d, -2.0, 2.0, eng);
    const auto series = oracle::exp_series(a, 30);
    EXPECT_LE(oracle::max_abs_diff(oracle::to_dense(mat_exp(a)), series), 1e-9);
  }
}

TEST(MatExp, SpectralMapping) {
  SplitMix64 eng(3);
  for (int i = 0; i < 500; ++i) {
    const SymMat a = random_with_spectrum(4, -5.0, 5.0, eng);
    const double lhs = lambda_max(mat_exp(a));
    const double rhs = std::exp(lambda_max(a));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * rhs);
  }
}

TEST(MatExp, TraceExpEqualsTraceOfExp) {
  SplitMix64 eng(4);
  for (int i = 0; i < 200; ++i) {
    const SymMat a = random_symmetric(4, 1.0, eng);
    const double te = trace_exp(a);
    EXPECT_NEAR(te, trace(mat_exp(a)), 1e-12 * te);
  }
}

TEST(MatLog, IdentityGivesZero) { EXPECT_EQ(mat_log(SymMat::identity(3)), SymMat(3)); }

TEST(MatLog, DiagonalMatchesScalarLog) {
  const auto l = mat_log(SymMat::diagonal({std::exp(1.0), std::exp(2.0)}));
  EXPECT_NEAR(l(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(l(1, 1), 2.0, 1e-15);
}

TEST(MatLog, RejectsNonPositiveDefinite) {
  EXPECT_THROW(mat_log(SymMat::diagonal({1.0, 0.0})), DomainError);
  EXPECT_THROW(mat_log(SymMat::diagonal({1.0, -1.0})), DomainError);
  EXPECT_THROW(mat_log(SymMat::diagonal({1.0, 1e-13})), DomainError);
  try {
    mat_log(SymMat::diagonal({2.0, -0.5}));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda_min"), std::string::npos);
  }
}

TEST(MatLog, RoundTrip) {
  SplitMix64 eng(77);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(i % 8);
    const SymMat a = random_with_spectrum(d, -5.0, 5.0, eng);
    worst = std::max(worst, max_abs_diff(mat_log(mat_exp(a)), a));
    const SymMat p = mat_exp(a);
    const SymMat back = mat_exp(mat_log(p));
    EXPECT_LE(max_abs_diff(back, p), 1e-9 * p.max_abs());
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(MatIntPow, Examples) {
  SplitMix64 eng(1);
  const SymMat a = random_symmetric(3, 1.0, eng);
  EXPECT_EQ(mat_int_pow(a, 0), SymMat::identity(3));
  EXPECT_EQ(mat_int_pow(SymMat::diagonal({2.0, 3.0}), 3), SymMat::diagonal({8.0, 27.0}));
  EXPECT_EQ(mat_int_pow(SymMat(2, {0.0, 1.0, 1.0, 0.0}), 2), SymMat::identity(2));
}

TEST(LambdaMax, Examples) {
  EXPECT_EQ(lambda_max(SymMat::identity(3)), 1.0);
  EXPECT_EQ(lambda_max(SymMat::diagonal({-1.0, 5.0, 2.0})), 5.0);
  EXPECT_NEAR(lambda_max(SymMat(2, {2.0, 1.0, 1.0, 2.0})), oracle::eig2(2.0, 1.0, 2.0).second, 1e-14);
}

TEST(SpectralNorm, Examples) {
  EXPECT_EQ(spectral_norm(SymMat::diagonal({-4.0, 3.0})), 4.0);
  EXPECT_EQ(spectral_norm(SymMat(2)), 0.0);
  EXPECT_NEAR(spectral_norm(SymMat(2, {2.0, 1.0, 1.0, 2.0})), 3.0, 1e-14);
}

TEST(Trace, Examples) {
  EXPECT_EQ(trace(SymMat::identity(3)), 3.0);
  EXPECT_EQ(trace(SymMat(2)), 0.0);
  EXPECT_EQ(trace(SymMat::diagonal({1.5, -0.5})), 1.0);
}

TEST(Trace, LambdaMaxBoundedByTraceForPsd) {
  SplitMix64 eng(6);
  for (int i = 0; i < 1000; ++i) {
    const SymMat p = random_psd(1 + i % 6, 1.0, eng);
    EXPECT_LE(lambda_max(p), trace(p) * (1.0 + 1e-12) + 1e-14);
  }
}

TEST(PsdOrder, Examples) {
  SplitMix64 eng(10);
  const SymMat a = random_symmetric(3, 1.0, eng);
  EXPECT_TRUE(psd_order_leq(a, a));
  EXPECT_TRUE(psd_order_leq(SymMat::diagonal({1.0, 2.0}), SymMat::diagonal({2.0, 3.0})));
  const SymMat e1 = SymMat::diagonal({1.0, 0.0});
  const SymMat e2 = SymMat::diagonal({0.0, 1.0});
  EXPECT_FALSE(psd_order_leq(e1, e2));
  EXPECT_FALSE(psd_order_leq(e2, e1));
  EXPECT_THROW(psd_order_leq(SymMat(2), SymMat(3)), DimensionError);
}

TEST(PsdOrder, ReflexiveAndTransitiveOnRandomChains) {
  SplitMix64 eng(12);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(i % 6);
    const SymMat a = random_symmetric(d, 1.0, eng);
    const SymMat b = a + random_psd(d, 0.5, eng);
    const SymMat c = b + random_psd(d, 0.5, eng);
    EXPECT_TRUE(psd_order_leq(a, a));
    EXPECT_TRUE(psd_order_leq(a, b));
    EXPECT_TRUE(psd_order_leq(b, c));
    EXPECT_TRUE(psd_order_leq(a, c));
  }
}
