#include <gtest/gtest.h>

#include <cmath>

#include "matbern/random_matrix.hpp"
#include "matbern/supermartingale.hpp"

using namespace matbern;

namespace {

MartingalePath scalar_path(const std::vector<double>& steps, const std::vector<double>& vars) {
  std::vector<SymMat> inc, var;
  for (double s : steps) inc.push_back(SymMat::diagonal({s}));
  for (double v : vars) var.push_back(SymMat::diagonal({v}));
  return MartingalePath::from_increments(inc, var);
}

std::vector<SymMat> random_directions(std::size_t dim, int count, SplitMix64& eng) {
  std::vector<SymMat> out;
  for (int k = 0; k < count; ++k) out.push_back(random_symmetric(dim, 0.5, eng));
  return out;
}

}  // namespace

TEST(SProcess, StartsAtDimension) {
  SplitMix64 eng(50);
  const auto spec = GeneratorSpec::gaussian(random_directions(3, 5, eng));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = s_process(generate_path(spec, seed), 0.4, min_bernstein_c(spec));
    EXPECT_NEAR(s.values.front(), 3.0, 1e-15);
    for (double v : s.values) EXPECT_GT(v, 0.0);
  }
}

TEST(SProcess, ScalarFormula) {
  const double m = 0.7, v = 0.4, t = 0.6, c = 1.2;
  const auto s = s_process(scalar_path({m}, {v}), t, c);
  EXPECT_NEAR(s.values[1], std::exp(t * m) / (1.0 + v * t * t / (2.0 * (1.0 - t * c))), 1e-14);
}

TEST(SProcess, ZeroPathStaysAtDimension) {
  const auto spec = GeneratorSpec::rademacher({SymMat(4), SymMat(4), SymMat(4)});
  const auto s = s_process(generate_path(spec, 1), 0.5, 1.0);
  for (double v : s.values) EXPECT_EQ(v, 4.0);
}

TEST(SProcess, RejectsBadTilt) {
  EXPECT_THROW(s_process(scalar_path({1.0}, {1.0}), 1.0, 1.0), ParameterError);
  EXPECT_THROW(s_process(scalar_path({1.0}, {-1.0}), 0.5, 1.0), DomainError);
}

TEST(SProcess, FastLambdaRouteMatchesGeneric) {
  SplitMix64 eng(51);
  const auto spec = GeneratorSpec::state_scaled(random_directions(3, 6, eng), 0.3, 0.8);
  const auto path = generate_path(spec, 3);
  auto stripped = path;
  stripped.directions.reset();
  const auto fast = s_process(path, 0.5, 1.0);
  const auto slow = s_process(stripped, 0.5, 1.0);
  for (std::size_t n = 0; n < fast.values.size(); ++n) {
    EXPECT_NEAR(fast.values[n], slow.values[n], 1e-12 * slow.values[n]);
  }
}

TEST(EventA, Fixtures) {
  const double x = 0.3, y = 0.7, c = 1.0;
  const double t = optimal_t(x, y, c);
  const auto zero = scalar_path({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  for (int n = 1; n <= 3; ++n) EXPECT_FALSE(event_a(zero, n, x, y, t, c));

  const auto tight = scalar_path({x, x, x}, {y, y, y});
  for (int n = 1; n <= 3; ++n) EXPECT_TRUE(event_a(tight, n, x, y, t, c));

  const auto heavy = scalar_path({x, x, x}, {2 * y, 2 * y, 2 * y});
  for (int n = 1; n <= 3; ++n) EXPECT_FALSE(event_a(heavy, n, x, y, t, c));

  EXPECT_THROW(event_a(tight, 0, x, y, t, c), ParameterError);
  EXPECT_THROW(event_a(tight, 4, x, y, t, c), ParameterError);
}

TEST(StoppingTime, Fixtures) {
  const auto zero = scalar_path({0.0, 0.0}, {0.0, 0.0});
  EXPECT_FALSE(stopping_time(zero, 1.0, 1.0, 0.5, 1.0).has_value());

  const auto late = scalar_path({0.5, 0.5, 2.0, -5.0}, {1.0, 1.0, 1.0, 1.0});
  const auto tau = stopping_time(late, 1.0, 1.0, 0.5, 1.0);
  ASSERT_TRUE(tau.has_value());
  EXPECT_EQ(*tau, 3);

  const LambdaSums sums(late, 0.5, 1.0);
  EXPECT_EQ(stopped_value(late, sums, tau), s_value(late, sums, 3));
  EXPECT_EQ(stopped_value(late, sums, std::nullopt), s_value(late, sums, 4));
}

TEST(StoppingTime, IsFirstHitAndDependsOnlyOnPrefix) {
  SplitMix64 eng(52);
  const auto spec = GeneratorSpec::rademacher(random_directions(2, 12, eng));
  const double c = min_bernstein_c(spec);
  const double x = 0.05, y = 2.0;
  const double t = optimal_t(x, y, c);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto path = generate_path(spec, seed);
    const auto tau = stopping_time(path, x, y, t, c);
    std::optional<int> scan;
    for (int n = 1; n <= path.horizon() && !scan; ++n) {
      if (event_a(path, n, x, y, t, c)) scan = n;
    }
    EXPECT_EQ(tau, scan);
    if (tau) {
      ++hits;
      EXPECT_EQ(stopping_time(generate_path(spec, seed, *tau), x, y, t, c), tau);
    }
  }
  EXPECT_GT(hits, 0);
}

TEST(LowerBound, VacuousWhenEventFails) {
  const auto zero = scalar_path({0.0}, {0.0});
  EXPECT_EQ(lower_bound_check(zero, 1, 1.0, 1.0, 0.5, 1.0).outcome, CheckOutcome::kVacuous);
}

TEST(LowerBound, TightScalarFixtureHasZeroSlack) {
  const double x = 0.3, y = 0.7, c = 1.0;
  const double t = optimal_t(x, y, c);
  const auto tight = scalar_path({x, x, x, x}, {y, y, y, y});
  for (int n = 1; n <= 4; ++n) {
    const auto r = lower_bound_check(tight, n, x, y, t, c);
    EXPECT_EQ(r.outcome, CheckOutcome::kPass);
    EXPECT_LE(std::abs(r.s_n - r.lower_bound), 1e-12 * r.lower_bound);
  }
}

TEST(LowerBound, HoldsOnRandomPaths) {
  SplitMix64 eng(53);
  const auto spec = GeneratorSpec::state_scaled(random_directions(3, 10, eng), 0.4, 1.0);
  const double c = min_bernstein_c(spec);
  const double x = 0.05, y = 2.0;
  const double t = optimal_t(x, y, c);
  int checks = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto path = generate_path(spec, seed);
    const LambdaSums sums(path, t, c);
    for (int n = 1; n <= path.horizon(); ++n) {
      const auto r = lower_bound_check(path, sums, n, x, y);
      ASSERT_NE(r.outcome, CheckOutcome::kFail);
      if (r.outcome == CheckOutcome::kPass) ++checks;
    }
  }
  EXPECT_GT(checks, 0);
}

// Sign multipliers make E[S_n | F_{n-1}] a two-term average, so the
// supermartingale step is checked exactly.
TEST(Supermartingale, ExactRademacherConditionalStep) {
  SplitMix64 eng(54);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    const auto dirs = random_directions(d, 6, eng);
    for (auto spec : {GeneratorSpec::rademacher(dirs), GeneratorSpec::state_scaled(dirs, 0.2, 0.9)}) {
      const double c = min_bernstein_c(spec);
      const double t = (0.1 + 0.85 * uniform01(eng)) / c;
      const int n = 1 + static_cast<int>(eng() % 6);
      const auto prefix = generate_path(spec, eng(), n);
      const LambdaSums sums(prefix, t, c, n);
      const SymMat& prev = prefix.state(n - 1);
      const SymMat step = (t * spec.scale(prev)) * spec.direction(n);
      const SymMat base = t * prev - sums.at(n);
      const double next = 0.5 * (trace_exp(base + step) + trace_exp(base - step));
      const double s_prev = s_value(prefix, sums, n - 1);
      EXPECT_LE(next, s_prev * (1.0 + 1e-12));
    }
  }
}
