#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "matbern/bounds.hpp"
#include "matbern/error.hpp"
#include "matbern/martingale.hpp"
#include "matbern/random_matrix.hpp"
#include "matbern/rng.hpp"
#include "matbern/spectral.hpp"

namespace matbern {

enum class LemmaId { kTraceMonotone, kLiebConcavity, kLiebExpectation, kLogMonotone, kKeyStep };

inline std::string_view to_string(LemmaId id) {
  switch (id) {
    case LemmaId::kTraceMonotone: return "trace_monotone";
    case LemmaId::kLiebConcavity: return "lieb_concavity";
    case LemmaId::kLiebExpectation: return "lieb_expectation";
    case LemmaId::kLogMonotone: return "log_monotone";
    case LemmaId::kKeyStep: return "key_step";
  }
  return "unknown";
}

// Slack is (larger side - smaller side) of the inequality under test, so a
// negative value beyond the tolerance is a violation.
struct LemmaReport {
  LemmaId lemma_id = LemmaId::kTraceMonotone;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  // Trials whose slack exceeded the tolerance (strict inequality observed).
  std::int64_t strict = 0;

  bool ok() const noexcept { return violations == 0; }
};

namespace detail {

inline void record(LemmaReport& r, double slack, double tol) {
  ++r.trials;
  r.worst_slack = std::min(r.worst_slack, slack);
  if (slack < -tol) ++r.violations;
  if (slack > tol) ++r.strict;
}

inline SplitMix64 lemma_engine(std::uint64_t seed, std::int64_t trial) {
  return SplitMix64(derive_seed(seed, static_cast<std::uint64_t>(trial)));
}

}  // namespace detail

// ---- single-instance checks (also used directly by fixtures) -------------

// tr e^B - tr e^A, for A <= B.
inline double trace_monotone_slack(const SymMat& a, const SymMat& b) {
  return trace_exp(b) - trace_exp(a);
}

// f(A) = tr exp(B + log A)
inline double lieb_function(const SymMat& b, const SymMat& a) { return trace_exp(b + mat_log(a)); }

// f((1-w) A1 + w A2) - ((1-w) f(A1) + w f(A2)); also returns the scale used
// for the tolerance via `magnitude`.
inline double lieb_concavity_slack(const SymMat& b, const SymMat& a1, const SymMat& a2, double w,
                                   double* magnitude = nullptr) {
  const double f1 = lieb_function(b, a1);
  const double f2 = lieb_function(b, a2);
  const double fm = lieb_function(b, (1.0 - w) * a1 + w * a2);
  if (magnitude) *magnitude = std::max({std::abs(f1), std::abs(f2), std::abs(fm)});
  return fm - ((1.0 - w) * f1 + w * f2);
}

struct LiebExpectationSides {
  double lhs = 0.0;  // E tr exp(B + X)
  double rhs = 0.0;  // tr exp(B + log E e^X)
};

// X takes outcomes[i] with probability weights[i] / sum(weights); both sides
// are finite sums.
inline LiebExpectationSides lieb_expectation_sides(const SymMat& b, const std::vector<SymMat>& outcomes,
                                                   const std::vector<double>& weights) {
  if (outcomes.empty() || outcomes.size() != weights.size()) {
    throw DimensionError("lieb_expectation_sides: need one weight per outcome");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ParameterError("lieb_expectation_sides: weights must be positive");
    total += w;
  }
  LiebExpectationSides s;
  SymMat mean_exp(b.dim());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double p = weights[i] / total;
    s.lhs += p * trace_exp(b + outcomes[i]);
    mean_exp = mean_exp + p * mat_exp(outcomes[i]);
  }
  s.rhs = trace_exp(b + mat_log(mean_exp));
  return s;
}

// lambda_min(log B - log A), for A <= B positive definite.
inline double log_monotone_slack(const SymMat& a, const SymMat& b) {
  return lambda_min(mat_log(b) - mat_log(a));
}

// ---- randomized suites ---------------------------------------------------

inline LemmaReport lemma_trace_monotone(std::int64_t trials, std::size_t dim, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("lemma_trace_monotone: trials must be >= 1");
  LemmaReport r{LemmaId::kTraceMonotone};
  for (std::int64_t i = 0; i < trials; ++i) {
    auto eng = detail::lemma_engine(seed, i);
    const SymMat a = random_symmetric(dim, 1.0, eng);
    const SymMat b = a + random_psd(dim, 0.5, eng);
    detail::record(r, trace_monotone_slack(a, b), 1e-9 * trace_exp(b));
  }
  return r;
}

inline LemmaReport lemma_lieb_concavity(std::int64_t trials, std::size_t dim, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("lemma_lieb_concavity: trials must be >= 1");
  LemmaReport r{LemmaId::kLiebConcavity};
  for (std::int64_t i = 0; i < trials; ++i) {
    auto eng = detail::lemma_engine(seed, i);
    const SymMat b = random_symmetric(dim, 0.5, eng);
    // Resample until both endpoints are safely inside the log domain.
    SymMat a1, a2;
    do {
      a1 = random_pd(dim, 0.7, 0.05, eng);
      a2 = random_pd(dim, 0.7, 0.05, eng);
    } while (lambda_min(a1) <= 1e-6 || lambda_min(a2) <= 1e-6);
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst = 0.0;
    double worst_tol = 0.0;
    for (double w : {0.25, 0.5, 0.75}) {
      double mag = 0.0;
      const double slack = lieb_concavity_slack(b, a1, a2, w, &mag);
      const double tol = 1e-9 * (1.0 + mag);
      if (slack + tol < worst_margin) {
        worst_margin = slack + tol;
        worst = slack;
        worst_tol = tol;
      }
    }
    detail::record(r, worst, worst_tol);
  }
  return r;
}

// Laws with 2..8 outcomes and integer weights 1..10.
inline LemmaReport lemma_lieb_expectation(std::int64_t trials, std::size_t dim, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("lemma_lieb_expectation: trials must be >= 1");
  LemmaReport r{LemmaId::kLiebExpectation};
  for (std::int64_t i = 0; i < trials; ++i) {
    auto eng = detail::lemma_engine(seed, i);
    const SymMat b = random_symmetric(dim, 0.5, eng);
    const auto m = 2 + static_cast<std::size_t>(eng() % 7);
    std::vector<SymMat> outcomes;
    std::vector<double> weights;
    for (std::size_t j = 0; j < m; ++j) {
      outcomes.push_back(random_symmetric(dim, 0.7, eng));
      weights.push_back(static_cast<double>(1 + eng() % 10));
    }
    const auto sides = lieb_expectation_sides(b, outcomes, weights);
    detail::record(r, sides.rhs - sides.lhs, 1e-9 * sides.rhs);
  }
  return r;
}

inline LemmaReport lemma_log_monotone(std::int64_t trials, std::size_t dim, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("lemma_log_monotone: trials must be >= 1");
  LemmaReport r{LemmaId::kLogMonotone};
  for (std::int64_t i = 0; i < trials; ++i) {
    auto eng = detail::lemma_engine(seed, i);
    const SymMat a = random_pd(dim, 0.7, 0.05, eng);
    const SymMat b = a + random_psd(dim, 0.5, eng);
    const SymMat la = mat_log(a);
    const SymMat lb = mat_log(b);
    const double tol = 1e-8 * (1.0 + spectral_norm(la) + spectral_norm(lb));
    detail::record(r, lambda_min(lb - la), tol);
  }
  return r;
}

// The one-step inequality behind the supermartingale property, checked with
// closed-form conditional laws along `trials` sampled paths:
//   (a) E[exp(t dM_k) | F] <= I + t^2 V_k / (2(1 - tc))
//   (b) log E[exp(t dM_k) | F] <= Lambda_{V_k}(t)
//   (c) I + sum_{p=2}^{p_max} t^p/p! E[dM_k^p | F] <= I + t^2 V_k / (2(1 - tc))
// Every (path, step, check) counts as one trial in the report.
inline LemmaReport key_step_check(std::int64_t trials, const GeneratorSpec& spec, double t, double c,
                                  int p_max, std::uint64_t seed = 0) {
  if (trials < 1) throw ParameterError("key_step_check: trials must be >= 1");
  if (p_max < 2) throw ParameterError("key_step_check: p_max must be >= 2");
  require_tilt(t, c);
  const double c_min = min_bernstein_c(spec);
  if (c < c_min * (1.0 - 1e-12)) {
    throw PreconditionError("key_step_check: c below certified Bernstein constant " +
                            std::to_string(c_min));
  }
  LemmaReport r{LemmaId::kKeyStep};
  const std::size_t d = spec.dim();
  const SymMat eye = SymMat::identity(d);
  const double coef = tilt_coefficient(t, c);
  for (std::int64_t i = 0; i < trials; ++i) {
    const auto path = generate_path(spec, derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (int k = 1; k <= spec.horizon(); ++k) {
      const double s = path.scales[static_cast<std::size_t>(k - 1)];
      const SymMat& v = path.pred_var(k);
      const SymMat mgf = conditional_mgf(spec, k, t, s);
      const SymMat series_rhs = eye + coef * v;

      detail::record(r, lambda_min(series_rhs - mgf), default_psd_tol(mgf, series_rhs));

      const SymMat log_mgf = mat_log(mgf);
      const SymMat cap = lambda_cap(v, t, c);
      detail::record(r, lambda_min(cap - log_mgf), default_psd_tol(log_mgf, cap));

      SymMat partial = eye;
      double tp_over_pfact = t;
      for (int p = 2; p <= p_max; ++p) {
        tp_over_pfact *= t / p;
        partial = partial + tp_over_pfact * conditional_moment(spec, k, p, s);
      }
      detail::record(r, lambda_min(series_rhs - partial), default_psd_tol(partial, series_rhs));
    }
  }
  return r;
}

}  // namespace matbern
