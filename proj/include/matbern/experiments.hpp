#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "matbern/bounds.hpp"
#include "matbern/error.hpp"
#include "matbern/martingale.hpp"
#include "matbern/parallel.hpp"
#include "matbern/rng.hpp"
#include "matbern/supermartingale.hpp"

namespace matbern {

struct TailEstimate {
  std::int64_t hits = 0;
  std::int64_t trials = 0;
  double p_hat = 0.0;
  double se = 0.0;
  double bound_product = 0.0;  // closed product form (valid bound when t = t*)
  double bound_exp = 0.0;
  double bound_generic = 0.0;  // d exp(n (Lambda_y(t) - t x)) at the t actually used
  double t = 0.0;
  BernsteinParams params;
  std::uint64_t seed = 0;
  // Pathwise lower-bound checks made on every hit.
  std::int64_t lower_bound_checks = 0;
  std::int64_t lower_bound_violations = 0;

  // The bound the estimate must respect at the tilt used.
  double applicable_bound() const noexcept {
    return params.t ? bound_generic : bound_product;
  }
};

struct TailPoint {
  double x = 1.0;
  double y = 1.0;
  std::optional<double> t;  // optimal_t(x, y, c) when unset
};

namespace detail {

inline constexpr double kCertifiedSlack = 1e-12;

inline void require_certified(const GeneratorSpec& spec, double c, int n, int d) {
  const double c_min = min_bernstein_c(spec);
  if (c < c_min * (1.0 - kCertifiedSlack)) {
    throw PreconditionError("c = " + std::to_string(c) +
                            " is below the generator's certified Bernstein constant " +
                            std::to_string(c_min));
  }
  if (n < 1 || n > spec.horizon()) {
    throw PreconditionError("n = " + std::to_string(n) + " outside the generator horizon [1, " +
                            std::to_string(spec.horizon()) + "]");
  }
  if (static_cast<std::size_t>(d) != spec.dim()) {
    throw PreconditionError("d = " + std::to_string(d) + " does not match generator dimension " +
                            std::to_string(spec.dim()));
  }
}

inline void finish_estimate(TailEstimate& e) {
  e.p_hat = e.trials > 0 ? static_cast<double>(e.hits) / static_cast<double>(e.trials) : 0.0;
  e.se = e.trials > 0 ? std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(e.trials)) : 0.0;
  const auto report = martingale_matrix_bound(e.params, e.t);
  e.bound_product = report.bound_product_form;
  e.bound_exp = report.bound_exp_form;
  e.bound_generic = report.bound_generic;
}

// Distinct tilts across a grid, so LambdaSums are shared between points.
inline std::vector<double> resolve_tilts(const std::vector<TailPoint>& points, double c,
                                         std::vector<std::size_t>& tilt_index) {
  std::vector<double> tilts;
  tilt_index.clear();
  for (const auto& p : points) {
    const double t = p.t ? *p.t : optimal_t(p.x, p.y, c);
    require_tilt(t, c);
    auto it = std::find(tilts.begin(), tilts.end(), t);
    tilt_index.push_back(static_cast<std::size_t>(it - tilts.begin()));
    if (it == tilts.end()) tilts.push_back(t);
  }
  return tilts;
}

struct TrialOutcome {
  std::vector<std::uint8_t> hit;
  std::vector<std::uint8_t> lb_fail;
};

}  // namespace detail

// Per-trial seed: derive_seed(seed, trial index).
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return derive_seed(seed, 0x7472690000000000ULL + trial);
}

// Fixed-horizon tail P(A_n) at each grid point, from one set of paths shared
// by all points. Each hit also runs the pathwise lower-bound check on S_n.
inline std::vector<TailEstimate> mc_tail_grid(const GeneratorSpec& spec, double c, int n,
                                              const std::vector<TailPoint>& points,
                                              std::int64_t trials, std::uint64_t seed,
                                              int workers = 1) {
  if (trials < 1) throw ParameterError("mc_tail_grid: trials must be >= 1");
  detail::require_certified(spec, c, n, static_cast<int>(spec.dim()));
  std::vector<std::size_t> tilt_index;
  const auto tilts = detail::resolve_tilts(points, c, tilt_index);

  const auto outcomes = parallel_map<detail::TrialOutcome>(
      static_cast<std::size_t>(trials), workers, [&](std::size_t i) {
        const auto path = generate_path(spec, trial_seed(seed, i), n);
        const double top = lambda_max(path.state(n));
        detail::TrialOutcome out;
        out.hit.assign(points.size(), 0);
        out.lb_fail.assign(points.size(), 0);
        std::vector<std::optional<LambdaSums>> sums(tilts.size());
        for (std::size_t g = 0; g < points.size(); ++g) {
          const double level = n * points[g].x;
          if (top < level - kEventRelTol * (1.0 + std::abs(level))) continue;
          auto& s = sums[tilt_index[g]];
          if (!s) s.emplace(path, tilts[tilt_index[g]], c, n);
          const auto check = lower_bound_check(path, *s, n, points[g].x, points[g].y);
          if (check.outcome == CheckOutcome::kVacuous) continue;
          out.hit[g] = 1;
          out.lb_fail[g] = check.outcome == CheckOutcome::kFail ? 1 : 0;
        }
        return out;
      });

  std::vector<TailEstimate> result(points.size());
  for (std::size_t g = 0; g < points.size(); ++g) {
    auto& e = result[g];
    e.trials = trials;
    e.seed = seed;
    e.t = tilts[tilt_index[g]];
    e.params = BernsteinParams{c, points[g].x, points[g].y, n, static_cast<int>(spec.dim()), points[g].t};
    for (const auto& o : outcomes) {
      e.hits += o.hit[g];
      e.lower_bound_violations += o.lb_fail[g];
    }
    e.lower_bound_checks = e.hits;
    detail::finish_estimate(e);
  }
  return result;
}

inline TailEstimate mc_tail_experiment(const GeneratorSpec& spec, const BernsteinParams& params,
                                       std::int64_t trials, std::uint64_t seed, int workers = 1) {
  params.validate();
  detail::require_certified(spec, params.c, params.n, params.d);
  return mc_tail_grid(spec, params.c, params.n, {TailPoint{params.x, params.y, params.t}}, trials,
                      seed, workers)
      .front();
}

// P(A_1 u ... u A_N) with N = params.n, via the stopping time. The bound
// fields are the fixed-n values at n = N, for comparison only.
inline TailEstimate mc_union_tail(const GeneratorSpec& spec, const BernsteinParams& params,
                                  std::int64_t trials, std::uint64_t seed, int workers = 1) {
  params.validate();
  detail::require_certified(spec, params.c, params.n, params.d);
  if (trials < 1) throw ParameterError("mc_union_tail: trials must be >= 1");
  const double t = params.t ? *params.t : optimal_t(params.x, params.y, params.c);
  const auto hits = parallel_map<std::uint8_t>(
      static_cast<std::size_t>(trials), workers, [&](std::size_t i) -> std::uint8_t {
        const auto path = generate_path(spec, trial_seed(seed, i), params.n);
        const LambdaSums sums(path, t, params.c);
        return stopping_time(path, sums, params.x, params.y) ? 1 : 0;
      });
  TailEstimate e;
  e.trials = trials;
  e.seed = seed;
  e.t = t;
  e.params = params;
  for (auto h : hits) e.hits += h;
  detail::finish_estimate(e);
  return e;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration over sign patterns (rademacher_series and
// state_scaled). M_n and the variance sums are accumulated directly along
// the recursion; the generic lambda_cap route is used for Lambda.

namespace detail {

struct EnumContext {
  const GeneratorSpec* spec;
  double x, y, t, c;
  int n_max;
  bool union_event;
  double var_level_unit;  // Lambda_y(t)
};

inline bool enum_event(const EnumContext& ctx, int n, const SymMat& m, const SymMat& l) {
  const double dev = n * ctx.x;
  if (lambda_max(m) < dev - kEventRelTol * (1.0 + std::abs(dev))) return false;
  const double var = n * ctx.var_level_unit;
  return lambda_max(l) <= var + kEventRelTol * (1.0 + var);
}

inline double enum_recurse(const EnumContext& ctx, int depth, const SymMat& m, const SymMat& l,
                           double weight) {
  if (depth > 0 && (ctx.union_event || depth == ctx.n_max)) {
    if (enum_event(ctx, depth, m, l)) return weight;
  }
  if (depth == ctx.n_max) return 0.0;
  const int k = depth + 1;
  const double s = ctx.spec->scale(m);
  const SymMat step = s * ctx.spec->direction(k);
  const SymMat l_next = l + lambda_cap(multiply_symmetric(step, step), ctx.t, ctx.c);
  return enum_recurse(ctx, k, m + step, l_next, 0.5 * weight) +
         enum_recurse(ctx, k, m - step, l_next, 0.5 * weight);
}

inline EnumContext make_enum_context(const GeneratorSpec& spec, int n, double x, double y, double t,
                                     double c, bool union_event) {
  if (spec.kind() == GeneratorKind::kGaussianSeries) {
    throw PreconditionError("exact enumeration needs a sign-multiplier generator");
  }
  if (n < 1 || n > spec.horizon()) throw ParameterError("exact enumeration: n out of range");
  if (n > 24) throw ParameterError("exact enumeration: n > 24 is too many sign patterns");
  return EnumContext{&spec, x, y, t, c, n, union_event, scalar_lambda(y, t, c)};
}

}  // namespace detail

// Exact P(A_n) by summing over all 2^n equiprobable sign patterns.
inline double exact_tail_probability(const GeneratorSpec& spec, int n, double x, double y, double t,
                                     double c) {
  const auto ctx = detail::make_enum_context(spec, n, x, y, t, c, false);
  return detail::enum_recurse(ctx, 0, SymMat(spec.dim()), SymMat(spec.dim()), 1.0);
}

// Exact P(A_1 u ... u A_n).
inline double exact_union_probability(const GeneratorSpec& spec, int n, double x, double y, double t,
                                      double c) {
  const auto ctx = detail::make_enum_context(spec, n, x, y, t, c, true);
  return detail::enum_recurse(ctx, 0, SymMat(spec.dim()), SymMat(spec.dim()), 1.0);
}

// ---------------------------------------------------------------------------
// Supermartingale sweeps.

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t samples = 0;
};

inline MeanEstimate mean_estimate(const std::vector<double>& values) {
  MeanEstimate e;
  e.samples = static_cast<std::int64_t>(values.size());
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.se = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return e;
}

struct SupermartingaleReport {
  MeanEstimate terminal;  // S_N
  MeanEstimate stopped;   // S_{tau ^ N}
  double initial = 0.0;   // S_0 = d
  std::int64_t stopped_early = 0;
  std::int64_t lower_bound_checks = 0;
  std::int64_t lower_bound_violations = 0;
  double t = 0.0;
  double c = 0.0;

  bool terminal_ok(double k_se = 4.0) const { return terminal.mean <= initial + k_se * terminal.se; }
  bool stopped_ok(double k_se = 4.0) const { return stopped.mean <= initial + k_se * stopped.se; }
};

// Independent full-horizon paths: E S_N <= d, E S_{tau ^ N} <= d, and the
// pathwise lower bound at every n where A_n holds.
inline SupermartingaleReport mc_supermartingale(const GeneratorSpec& spec, double t, double c,
                                                double x, double y, std::int64_t trials,
                                                std::uint64_t seed, int workers = 1) {
  require_tilt(t, c);
  detail::require_certified(spec, c, spec.horizon(), static_cast<int>(spec.dim()));
  if (trials < 1) throw ParameterError("mc_supermartingale: trials must be >= 1");
  struct PathResult {
    double terminal = 0.0;
    double stopped = 0.0;
    std::uint8_t early = 0;
    std::int32_t checks = 0;
    std::int32_t violations = 0;
  };
  const int horizon = spec.horizon();
  const auto results = parallel_map<PathResult>(
      static_cast<std::size_t>(trials), workers, [&](std::size_t i) {
        const auto path = generate_path(spec, trial_seed(seed, i));
        const LambdaSums sums(path, t, c);
        PathResult r;
        std::optional<int> tau;
        for (int n = 1; n <= horizon; ++n) {
          const auto check = lower_bound_check(path, sums, n, x, y);
          if (check.outcome == CheckOutcome::kVacuous) continue;
          if (!tau) tau = n;
          ++r.checks;
          if (check.outcome == CheckOutcome::kFail) ++r.violations;
        }
        r.terminal = s_value(path, sums, horizon);
        r.stopped = tau ? s_value(path, sums, *tau) : r.terminal;
        r.early = tau ? 1 : 0;
        return r;
      });
  SupermartingaleReport rep;
  rep.initial = static_cast<double>(spec.dim());
  rep.t = t;
  rep.c = c;
  std::vector<double> terminal, stopped;
  terminal.reserve(results.size());
  stopped.reserve(results.size());
  for (const auto& r : results) {
    terminal.push_back(r.terminal);
    stopped.push_back(r.stopped);
    rep.stopped_early += r.early;
    rep.lower_bound_checks += r.checks;
    rep.lower_bound_violations += r.violations;
  }
  rep.terminal = mean_estimate(terminal);
  rep.stopped = mean_estimate(stopped);
  return rep;
}

struct ConditionalStepReport {
  int n = 0;
  double s_prev = 0.0;  // S_{n-1} on the fixed prefix
  MeanEstimate next;    // mean of S_n over resampled dM_n

  bool ok(double k_se = 4.0) const { return next.mean <= s_prev + k_se * next.se; }
};

// Fixes the prefix M_0..M_{n-1} of the path with seed `prefix_seed`, redraws
// dM_n `resamples` times, and estimates E[S_n | F_{n-1}].
inline ConditionalStepReport conditional_step_check(const GeneratorSpec& spec, std::uint64_t prefix_seed,
                                                    int n, double t, double c, std::int64_t resamples,
                                                    std::uint64_t seed, int workers = 1) {
  require_tilt(t, c);
  if (n < 1 || n > spec.horizon()) throw ParameterError("conditional_step_check: n out of range");
  if (resamples < 1) throw ParameterError("conditional_step_check: resamples must be >= 1");
  const auto prefix = generate_path(spec, prefix_seed, n);
  const LambdaSums sums(prefix, t, c, n);
  const SymMat& prev = prefix.state(n - 1);
  const SymMat base = t * prev - sums.at(n);  // L_n is predictable
  const SymMat tilted_dir = (t * spec.scale(prev)) * spec.direction(n);

  ConditionalStepReport rep;
  rep.n = n;
  rep.s_prev = s_value(prefix, sums, n - 1);
  const auto values = parallel_map<double>(static_cast<std::size_t>(resamples), workers, [&](std::size_t j) {
    SplitMix64 eng(derive_seed(seed, j));
    return trace_exp(base + spec.draw_multiplier(eng) * tilted_dir);
  });
  rep.next = mean_estimate(values);
  return rep;
}

}  // namespace matbern
