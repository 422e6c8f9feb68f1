#pragma once

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "matbern/bounds.hpp"
#include "matbern/config.hpp"
#include "matbern/experiments.hpp"
#include "matbern/lemmas.hpp"
#include "matbern/martingale.hpp"

#ifndef MATBERN_VERSION
#define MATBERN_VERSION "0.1.0"
#endif

namespace matbern {

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"command", "d",     "n",  "x",  "y",
                                                "c",       "t",     "trials", "hits", "p_hat",
                                                "se",      "bound_product", "bound_exp", "seed",
                                                "wall_ms"};
  return cols;
}

// Unset cells are written empty.
struct CsvRow {
  std::string command;
  std::optional<std::int64_t> d, n;
  std::optional<double> x, y, c, t;
  std::optional<std::int64_t> trials, hits;
  std::optional<double> p_hat, se, bound_product, bound_exp;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

enum class Verdict { kPass, kFail, kReport };

struct RunResult {
  std::vector<CsvRow> rows;
  std::vector<std::string> summaries;  // one per row
  int failures = 0;

  bool all_pass() const noexcept { return failures == 0; }
};

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Canonical text of everything that determines the numbers (not workers,
// not the output path).
inline std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto list = [&](const char* name, const std::vector<double>& v) {
    os << name << '=';
    for (double d : v) os << format_real(d) << ';';
    os << '\n';
  };
  os << "command=" << cfg.command << "\nseed=" << cfg.seed << "\ntrials=" << cfg.trials
     << "\np_max=" << cfg.p_max << '\n';
  list("x", cfg.params.x);
  list("y", cfg.params.y);
  list("tc", cfg.params.tc);
  if (cfg.params.c) os << "c=" << format_real(*cfg.params.c) << '\n';
  if (cfg.params.t) os << "t=" << format_real(*cfg.params.t) << '\n';
  if (cfg.params.n) os << "n=" << *cfg.params.n << '\n';
  if (cfg.params.d) os << "d=" << *cfg.params.d << '\n';
  if (cfg.generator) {
    const auto& g = *cfg.generator;
    os << "kind=" << to_string(g.kind()) << "\ns_lo=" << format_real(g.s_lo())
       << "\ns_hi=" << format_real(g.s_hi()) << '\n';
    for (const auto& m : g.base_matrices()) {
      for (double v : m.data()) os << format_real(v) << ' ';
      os << '\n';
    }
  }
  return os.str();
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline std::string verdict_text(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kReport: return "REPORT";
  }
  return "?";
}

}  // namespace detail

inline std::string render_csv(const ExperimentConfig& cfg, const std::vector<CsvRow>& rows) {
  using detail::format_real;
  std::ostringstream os;
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016" PRIx64, detail::fnv1a64(detail::canonical_config(cfg)));
  os << "# matbern " << MATBERN_VERSION << '\n';
  os << "# config_digest=fnv1a64:" << digest << '\n';
  os << "# command=" << cfg.command << " seed=" << cfg.seed << '\n';
  os << "# bound: trials/hits/p_hat/se empty. tail, union-tail: hits = paths in the event, "
        "p_hat = hits/trials, bound_product = bound at the tilt used (d exp(n(Lambda_y(t)-tx)) when t is fixed)\n";
  os << "# simulate: p_hat = mean S_{tau^N}, se = its standard error, hits = lower-bound violations, "
        "bound_product = bound_exp = d\n";
  os << "# lemmas (rows: trace_monotone, lieb_concavity, lieb_expectation, log_monotone), "
        "check-condition, key-step: hits = violations, p_hat = worst_slack\n";
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  auto opt_int = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  auto opt_real = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const auto& r : rows) {
    os << detail::csv_field(r.command) << ',' << opt_int(r.d) << ',' << opt_int(r.n) << ','
       << opt_real(r.x) << ',' << opt_real(r.y) << ',' << opt_real(r.c) << ',' << opt_real(r.t) << ','
       << opt_int(r.trials) << ',' << opt_int(r.hits) << ',' << opt_real(r.p_hat) << ','
       << opt_real(r.se) << ',' << opt_real(r.bound_product) << ',' << opt_real(r.bound_exp) << ','
       << r.seed << ',' << detail::format_ms(r.wall_ms) << '\n';
  }
  return os.str();
}

// Drops the wall_ms column (the last field of each data row) for
// determinism comparisons.
inline std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() != '#') {
      const auto comma = line.rfind(',');
      if (comma != std::string::npos) line = line.substr(0, comma);
    }
    out << line << '\n';
  }
  return out.str();
}

inline RunResult run(const ExperimentConfig& cfg) {
  RunResult result;
  const auto& cmd = cfg.command;
  auto add = [&](CsvRow row, Verdict v, const std::string& detail_text) {
    if (v == Verdict::kFail) ++result.failures;
    std::ostringstream os;
    os << detail::verdict_text(v) << ' ' << cmd << ' ' << detail_text;
    result.summaries.push_back(os.str());
    result.rows.push_back(std::move(row));
  };
  auto base_row = [&]() {
    CsvRow r;
    r.command = cmd;
    r.seed = cfg.seed;
    return r;
  };
  using detail::format_real;

  if (cmd == "bound") {
    for (auto [x, y] : cfg.params.points()) {
      detail::Stopwatch sw;
      BernsteinParams bp{cfg.c(), x, y, *cfg.params.n, cfg.d(), cfg.params.t};
      const auto rep = martingale_matrix_bound(bp);
      CsvRow r = base_row();
      r.d = bp.d;
      r.n = bp.n;
      r.x = x;
      r.y = y;
      r.c = bp.c;
      r.t = rep.t_used;
      r.bound_product = rep.bound_product_form;
      r.bound_exp = rep.bound_exp_form;
      r.wall_ms = sw.ms();
      const bool ok = rep.bound_product_form <= rep.bound_exp_form * (1.0 + 1e-12);
      add(std::move(r), ok ? Verdict::kPass : Verdict::kFail,
          "x=" + format_real(x) + " y=" + format_real(y) + " product=" + format_real(rep.bound_product_form) +
              " <= exp=" + format_real(rep.bound_exp_form));
    }
    return result;
  }

  if (cmd == "tail" || cmd == "union-tail") {
    const auto& spec = *cfg.generator;
    const bool fixed_n = cmd == "tail";
    std::vector<TailEstimate> estimates;
    std::vector<double> times;
    if (fixed_n) {
      std::vector<TailPoint> pts;
      for (auto [x, y] : cfg.params.points()) pts.push_back({x, y, cfg.params.t});
      detail::Stopwatch sw;
      estimates = mc_tail_grid(spec, cfg.c(), *cfg.params.n, pts, cfg.trials, cfg.seed, cfg.workers);
      times.assign(estimates.size(), sw.ms() / static_cast<double>(estimates.size()));
    } else {
      for (auto [x, y] : cfg.params.points()) {
        detail::Stopwatch sw;
        BernsteinParams bp{cfg.c(), x, y, *cfg.params.n, cfg.d(), cfg.params.t};
        estimates.push_back(mc_union_tail(spec, bp, cfg.trials, cfg.seed, cfg.workers));
        times.push_back(sw.ms());
      }
    }
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const auto& e = estimates[i];
      CsvRow r = base_row();
      r.d = e.params.d;
      r.n = e.params.n;
      r.x = e.params.x;
      r.y = e.params.y;
      r.c = e.params.c;
      r.t = e.t;
      r.trials = e.trials;
      r.hits = e.hits;
      r.p_hat = e.p_hat;
      r.se = e.se;
      r.bound_product = e.applicable_bound();
      r.bound_exp = e.bound_exp;
      r.wall_ms = times[i];
      std::ostringstream os;
      os << "x=" << format_real(e.params.x) << " y=" << format_real(e.params.y)
         << " p_hat=" << format_real(e.p_hat) << " se=" << format_real(e.se)
         << " bound=" << format_real(e.applicable_bound());
      Verdict v = Verdict::kReport;
      if (fixed_n) {
        const bool ok = e.p_hat <= e.applicable_bound() + 3.0 * e.se && e.lower_bound_violations == 0;
        v = ok ? Verdict::kPass : Verdict::kFail;
        os << " lower_bound_violations=" << e.lower_bound_violations;
      }
      add(std::move(r), v, os.str());
    }
    return result;
  }

  if (cmd == "simulate") {
    const auto& spec = *cfg.generator;
    for (auto [x, y] : cfg.params.points()) {
      detail::Stopwatch sw;
      const double t = cfg.params.t ? *cfg.params.t : optimal_t(x, y, cfg.c());
      const auto rep = mc_supermartingale(spec, t, cfg.c(), x, y, cfg.trials, cfg.seed, cfg.workers);
      CsvRow r = base_row();
      r.d = cfg.d();
      r.n = spec.horizon();
      r.x = x;
      r.y = y;
      r.c = cfg.c();
      r.t = t;
      r.trials = cfg.trials;
      r.hits = rep.lower_bound_violations;
      r.p_hat = rep.stopped.mean;
      r.se = rep.stopped.se;
      r.bound_product = rep.initial;
      r.bound_exp = rep.initial;
      r.wall_ms = sw.ms();
      const bool ok = rep.terminal_ok() && rep.stopped_ok() && rep.lower_bound_violations == 0;
      std::ostringstream os;
      os << "x=" << format_real(x) << " y=" << format_real(y) << " mean_S_N=" << format_real(rep.terminal.mean)
         << "+-" << format_real(rep.terminal.se) << " mean_S_stopped=" << format_real(rep.stopped.mean) << "+-"
         << format_real(rep.stopped.se) << " d=" << rep.initial
         << " lower_bound_violations=" << rep.lower_bound_violations;
      add(std::move(r), ok ? Verdict::kPass : Verdict::kFail, os.str());
    }
    return result;
  }

  if (cmd == "lemmas") {
    const auto dim = static_cast<std::size_t>(cfg.d());
    using Suite = LemmaReport (*)(std::int64_t, std::size_t, std::uint64_t);
    const Suite suites[] = {lemma_trace_monotone, lemma_lieb_concavity, lemma_lieb_expectation,
                            lemma_log_monotone};
    for (std::size_t i = 0; i < 4; ++i) {
      detail::Stopwatch sw;
      const auto rep = suites[i](cfg.trials, dim, derive_seed(cfg.seed, i));
      CsvRow r = base_row();
      r.d = cfg.d();
      r.trials = rep.trials;
      r.hits = rep.violations;
      r.p_hat = rep.worst_slack;
      r.wall_ms = sw.ms();
      add(std::move(r), rep.ok() ? Verdict::kPass : Verdict::kFail,
          std::string(to_string(rep.lemma_id)) + " violations=" + std::to_string(rep.violations) +
              " worst_slack=" + format_real(rep.worst_slack));
    }
    return result;
  }

  if (cmd == "check-condition") {
    detail::Stopwatch sw;
    const auto& spec = *cfg.generator;
    const auto rep = check_bernstein_condition(spec, cfg.c(), cfg.p_max);
    CsvRow r = base_row();
    r.d = cfg.d();
    r.n = spec.horizon();
    r.c = cfg.c();
    r.trials = rep.checks;
    r.hits = static_cast<std::int64_t>(rep.violations.size());
    r.p_hat = rep.worst_lambda_min;
    r.wall_ms = sw.ms();
    std::ostringstream os;
    os << "c=" << format_real(cfg.c()) << " p_max=" << cfg.p_max << " violations=" << rep.violations.size();
    for (const auto& v : rep.violations) os << " (k=" << v.step << ",p=" << v.p << ")";
    add(std::move(r), rep.ok() ? Verdict::kPass : Verdict::kFail, os.str());
    return result;
  }

  if (cmd == "key-step") {
    const auto& spec = *cfg.generator;
    std::vector<double> tilts;
    for (double tc : cfg.params.tc) tilts.push_back(tc / cfg.c());
    if (tilts.empty() && cfg.params.t) tilts.push_back(*cfg.params.t);
    if (tilts.empty()) {
      for (auto [x, y] : cfg.params.points()) tilts.push_back(optimal_t(x, y, cfg.c()));
    }
    for (std::size_t i = 0; i < tilts.size(); ++i) {
      detail::Stopwatch sw;
      const auto rep = key_step_check(cfg.trials, spec, tilts[i], cfg.c(), cfg.p_max, derive_seed(cfg.seed, i));
      CsvRow r = base_row();
      r.d = cfg.d();
      r.n = spec.horizon();
      r.c = cfg.c();
      r.t = tilts[i];
      r.trials = rep.trials;
      r.hits = rep.violations;
      r.p_hat = rep.worst_slack;
      r.wall_ms = sw.ms();
      add(std::move(r), rep.ok() ? Verdict::kPass : Verdict::kFail,
          "t=" + format_real(tilts[i]) + " violations=" + std::to_string(rep.violations) +
              " worst_slack=" + format_real(rep.worst_slack));
    }
    return result;
  }

  throw ParameterError("run: unknown command '" + cmd + "'");
}

}  // namespace matbern
