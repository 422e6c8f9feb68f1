#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "matbern/bounds.hpp"
#include "matbern/error.hpp"
#include "matbern/martingale.hpp"
#include "matbern/spectral.hpp"
#include "matbern/symmat.hpp"

namespace matbern {

// Lambda_{V_n}(t) for step n of a path. Generated paths carry the direction
// eigenbasis, so no eigensolve is needed; fixtures go through lambda_cap.
inline SymMat lambda_step(const MartingalePath& path, int n, double t, double c) {
  const auto k = static_cast<std::size_t>(n - 1);
  if (path.directions && k < path.scales.size()) {
    return lambda_cap_of_square((*path.directions)[k], path.scales[k], t, c);
  }
  return lambda_cap(path.pred_var_steps[k], t, c);
}

// Cumulative sums L_n = sum_{k<=n} Lambda_{V_k}(t) for n = 0..up_to, built
// once per (path, t) and reused across (x, y) evaluations.
class LambdaSums {
 public:
  LambdaSums(const MartingalePath& path, double t, double c, std::optional<int> up_to = std::nullopt)
      : t_(t), c_(c) {
    require_tilt(t, c);
    const int n_max = up_to ? *up_to : path.horizon();
    if (n_max < 0 || n_max > path.horizon()) throw ParameterError("LambdaSums: index out of range");
    sums_.reserve(static_cast<std::size_t>(n_max) + 1);
    sums_.push_back(SymMat(path.dim()));
    for (int n = 1; n <= n_max; ++n) sums_.push_back(sums_.back() + lambda_step(path, n, t, c));
  }

  const SymMat& at(int n) const { return sums_.at(static_cast<std::size_t>(n)); }
  int size() const noexcept { return static_cast<int>(sums_.size()) - 1; }
  double t() const noexcept { return t_; }
  double c() const noexcept { return c_; }

 private:
  double t_;
  double c_;
  std::vector<SymMat> sums_;
};

// S_n = tr exp(t M_n - L_n).
inline double s_value(const MartingalePath& path, const LambdaSums& sums, int n) {
  return trace_exp(sums.t() * path.state(n) - sums.at(n));
}

struct SProcess {
  std::vector<double> values;  // S_0..S_N
  double t = 0.0;
  double c = 0.0;
};

inline SProcess s_process(const MartingalePath& path, double t, double c) {
  const LambdaSums sums(path, t, c);
  SProcess s{{}, t, c};
  s.values.reserve(static_cast<std::size_t>(path.horizon()) + 1);
  for (int n = 0; n <= path.horizon(); ++n) s.values.push_back(s_value(path, sums, n));
  return s;
}

// Comparisons in the event allow this relative rounding slack, so that paths
// sitting exactly on the boundary (M_n = nx, V_k = y) register as inside.
inline constexpr double kEventRelTol = 1e-12;

// A_n: lambda_max(M_n) >= n x  and  lambda_max(L_n) <= n Lambda_y(t).
inline bool event_a(const MartingalePath& path, const LambdaSums& sums, int n, double x, double y) {
  if (n < 1 || n > path.horizon() || n > sums.size()) {
    throw ParameterError("event_a: n out of range");
  }
  const double dev_level = n * x;
  if (lambda_max(path.state(n)) < dev_level - kEventRelTol * (1.0 + std::abs(dev_level))) return false;
  const double var_level = n * scalar_lambda(y, sums.t(), sums.c());
  return lambda_max(sums.at(n)) <= var_level + kEventRelTol * (1.0 + var_level);
}

inline bool event_a(const MartingalePath& path, int n, double x, double y, double t, double c) {
  if (n < 1 || n > path.horizon()) throw ParameterError("event_a: n out of range");
  return event_a(path, LambdaSums(path, t, c, n), n, x, y);
}

// First n in 1..N with A_n, or nullopt for "infinity" (no hit within the
// horizon). Only M_1..M_tau and V_1..V_tau are inspected.
inline std::optional<int> stopping_time(const MartingalePath& path, const LambdaSums& sums, double x,
                                        double y) {
  for (int n = 1; n <= sums.size(); ++n) {
    if (event_a(path, sums, n, x, y)) return n;
  }
  return std::nullopt;
}

inline std::optional<int> stopping_time(const MartingalePath& path, double x, double y, double t,
                                        double c) {
  return stopping_time(path, LambdaSums(path, t, c), x, y);
}

// S_{tau ^ N}: tau = infinity is read as N.
inline double stopped_value(const MartingalePath& path, const LambdaSums& sums,
                            std::optional<int> tau) {
  const int n = tau ? *tau : sums.size();
  return s_value(path, sums, n);
}

enum class CheckOutcome { kVacuous, kPass, kFail };

struct CheckResult {
  CheckOutcome outcome = CheckOutcome::kVacuous;
  double s_n = 0.0;
  double lower_bound = 0.0;  // exp(n (t x - Lambda_y(t)))
};

// On A_n the process is bounded below: S_n >= exp(n (t x - Lambda_y(t))).
inline CheckResult lower_bound_check(const MartingalePath& path, const LambdaSums& sums, int n,
                                     double x, double y) {
  CheckResult r;
  if (!event_a(path, sums, n, x, y)) return r;
  const double t = sums.t();
  r.s_n = s_value(path, sums, n);
  r.lower_bound = std::exp(n * (t * x - scalar_lambda(y, t, sums.c())));
  r.outcome = r.s_n >= r.lower_bound - 1e-9 * std::abs(r.s_n) ? CheckOutcome::kPass : CheckOutcome::kFail;
  return r;
}

inline CheckResult lower_bound_check(const MartingalePath& path, int n, double x, double y, double t,
                                     double c) {
  if (n < 1 || n > path.horizon()) throw ParameterError("lower_bound_check: n out of range");
  return lower_bound_check(path, LambdaSums(path, t, c, n), n, x, y);
}

}  // namespace matbern
