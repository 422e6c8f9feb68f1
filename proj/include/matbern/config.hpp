#pragma once

// Experiment config: line-oriented `key = value` text.
//
//   # comment (to end of line)
//   command = tail              # optional; must match the CLI subcommand
//   seed = 42                   # required
//   trials = 100000
//   workers = 4
//   output = results.csv
//   p_max = 12                  # check-condition / key-step
//
//   [params]
//   x = 0.25, 0.5, 1            # comma-separated lists
//   y = 0.5, 1
//   c = 1                       # defaults to the generator's certified constant
//   n = 10
//   d = 2                       # defaults to generator.dim
//   t = 0.3                     # optional fixed tilt; t* = x/(y+cx) otherwise
//   tc = 0.1, 0.5, 0.9          # key-step: tilts given as products t*c
//
//   [generator]
//   kind = rademacher_series | gaussian_series | state_scaled
//   dim = 2
//   horizon = 10
//   s_lo = 0.5                  # state_scaled only
//   s_hi = 1
//   matrix = 1 0 0 -1           # row-major; one line per step, or a single
//                               # line reused for every step

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "matbern/bounds.hpp"
#include "matbern/error.hpp"
#include "matbern/martingale.hpp"

namespace matbern {

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands = {"bound",   "simulate",        "tail",    "union-tail",
                                                    "lemmas",  "check-condition", "key-step"};
  return commands;
}

struct ParamGrid {
  std::vector<double> x;
  std::vector<double> y;
  std::optional<double> c;
  std::optional<int> n;
  std::optional<int> d;
  std::optional<double> t;
  std::vector<double> tc;

  // x-major cartesian product.
  std::vector<std::pair<double, double>> points() const {
    std::vector<std::pair<double, double>> out;
    for (double xv : x)
      for (double yv : y) out.emplace_back(xv, yv);
    return out;
  }
};

struct ExperimentConfig {
  std::string command;
  std::optional<GeneratorSpec> generator;
  ParamGrid params;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::string output_path;
  int workers = 1;
  int p_max = 12;

  // Resolved constants after validation.
  double c() const { return *params.c; }
  int d() const { return *params.d; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return value;
}

inline std::optional<std::vector<double>> parse_list(std::string_view s, char sep) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next;
    std::string_view item;
    if (sep == ' ') {
      const auto b = s.find_first_not_of(" \t", pos);
      if (b == std::string_view::npos) break;
      next = s.find_first_of(" \t", b);
      if (next == std::string_view::npos) next = s.size();
      item = s.substr(b, next - b);
    } else {
      next = s.find(sep, pos);
      if (next == std::string_view::npos) next = s.size();
      item = s.substr(pos, next - pos);
    }
    auto v = parse_number<double>(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
    pos = next + 1;
  }
  if (out.empty()) return std::nullopt;
  return out;
}

struct RawEntry {
  int line = 0;
  std::string value;
};

struct RawConfig {
  // section -> key -> entries (multiple only for generator.matrix)
  std::map<std::string, std::map<std::string, std::vector<RawEntry>>> sections;

  const RawEntry* get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end() || k->second.empty()) return nullptr;
    return &k->second.front();
  }
  bool has_section(const std::string& section) const { return sections.count(section) != 0; }
};

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"", {"command", "seed", "trials", "workers", "output", "p_max"}},
      {"params", {"x", "y", "c", "n", "d", "t", "tc"}},
      {"generator", {"kind", "dim", "horizon", "s_lo", "s_hi", "scale_fn", "matrix"}},
  };
  return keys;
}

inline RawConfig lex_config(std::string_view text, std::vector<std::string>& errors) {
  RawConfig raw;
  raw.sections[""];
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "syntax error: unterminated section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!allowed_keys().count(section) || section.empty()) {
        errors.push_back(where + "unknown section [" + section + "]");
      }
      raw.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "syntax error: expected 'key = value'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      errors.push_back(where + "syntax error: empty key or value");
      continue;
    }
    auto allowed = allowed_keys().find(section);
    if (allowed != allowed_keys().end() && !allowed->second.count(key)) {
      errors.push_back(where + "unknown key '" + key + "'" +
                       (section.empty() ? std::string() : " in [" + section + "]"));
      continue;
    }
    auto& entries = raw.sections[section][key];
    if (!entries.empty() && key != "matrix") {
      errors.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    entries.push_back({line_no, value});
  }
  return raw;
}

inline std::string field_path(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace detail

// Parses and validates. Collects every problem before throwing ConfigError.
// `command_override` (the CLI subcommand) wins over a missing `command` key
// and must agree with a present one.
inline ExperimentConfig parse_config(std::string_view text,
                                     std::optional<std::string> command_override = std::nullopt) {
  using detail::field_path;
  std::vector<std::string> errors;
  const auto raw = detail::lex_config(text, errors);
  ExperimentConfig cfg;

  auto int_field = [&](const std::string& section, const std::string& key) -> std::optional<std::int64_t> {
    const auto* e = raw.get(section, key);
    if (!e) return std::nullopt;
    auto v = detail::parse_number<std::int64_t>(e->value);
    if (!v) errors.push_back(field_path(section, key) + ": expected an integer, got '" + e->value + "'");
    return v;
  };
  auto real_field = [&](const std::string& section, const std::string& key) -> std::optional<double> {
    const auto* e = raw.get(section, key);
    if (!e) return std::nullopt;
    auto v = detail::parse_number<double>(e->value);
    if (!v) errors.push_back(field_path(section, key) + ": expected a number, got '" + e->value + "'");
    return v;
  };
  auto list_field = [&](const std::string& section, const std::string& key) -> std::vector<double> {
    const auto* e = raw.get(section, key);
    if (!e) return {};
    auto v = detail::parse_list(e->value, ',');
    if (!v) {
      errors.push_back(field_path(section, key) + ": expected a comma-separated list of numbers");
      return {};
    }
    return *v;
  };

  // -- top level
  const auto* cmd_entry = raw.get("", "command");
  if (command_override) {
    cfg.command = *command_override;
    if (cmd_entry && cmd_entry->value != *command_override) {
      errors.push_back("command: config says '" + cmd_entry->value + "' but '" + *command_override +
                       "' was requested");
    }
  } else if (cmd_entry) {
    cfg.command = cmd_entry->value;
  } else {
    errors.push_back("command: required");
  }
  const auto& commands = known_commands();
  const bool known = std::find(commands.begin(), commands.end(), cfg.command) != commands.end();
  if (!cfg.command.empty() && !known) errors.push_back("command: unknown command '" + cfg.command + "'");

  if (const auto* e = raw.get("", "seed")) {
    auto v = detail::parse_number<std::uint64_t>(e->value);
    if (!v) errors.push_back("seed: expected a nonnegative 64-bit integer, got '" + e->value + "'");
    else cfg.seed = *v;
  } else {
    errors.push_back("seed: required (no default seed)");
  }
  const bool needs_trials = cfg.command == "simulate" || cfg.command == "tail" ||
                            cfg.command == "union-tail" || cfg.command == "lemmas" ||
                            cfg.command == "key-step";
  if (auto v = int_field("", "trials")) {
    if (*v < 1) errors.push_back("trials: must be >= 1");
    cfg.trials = *v;
  } else if (needs_trials && !raw.get("", "trials")) {
    errors.push_back("trials: required for command '" + cfg.command + "'");
  }
  if (auto v = int_field("", "workers")) {
    if (*v < 1) errors.push_back("workers: must be >= 1");
    cfg.workers = static_cast<int>(*v);
  }
  if (auto v = int_field("", "p_max")) {
    if (*v < 2) errors.push_back("p_max: must be >= 2");
    cfg.p_max = static_cast<int>(*v);
  }
  if (const auto* e = raw.get("", "output")) cfg.output_path = e->value;

  // -- params
  auto& p = cfg.params;
  p.x = list_field("params", "x");
  p.y = list_field("params", "y");
  p.tc = list_field("params", "tc");
  p.c = real_field("params", "c");
  p.t = real_field("params", "t");
  if (auto v = int_field("params", "n")) p.n = static_cast<int>(*v);
  if (auto v = int_field("params", "d")) p.d = static_cast<int>(*v);
  for (std::size_t i = 0; i < p.x.size(); ++i)
    if (!(p.x[i] > 0.0)) errors.push_back("params.x[" + std::to_string(i) + "]: must be positive");
  for (std::size_t i = 0; i < p.y.size(); ++i)
    if (!(p.y[i] > 0.0)) errors.push_back("params.y[" + std::to_string(i) + "]: must be positive");
  if (p.c && !(*p.c > 0.0)) errors.push_back("params.c: must be positive");
  if (p.n && *p.n < 1) errors.push_back("params.n: must be >= 1");
  if (p.d && *p.d < 1) errors.push_back("params.d: must be >= 1");

  // -- generator
  const bool needs_generator = cfg.command == "simulate" || cfg.command == "tail" ||
                               cfg.command == "union-tail" || cfg.command == "check-condition" ||
                               cfg.command == "key-step";
  if (raw.has_section("generator")) {
    std::optional<GeneratorKind> kind;
    if (const auto* e = raw.get("generator", "kind")) {
      kind = parse_generator_kind(e->value);
      if (!kind) errors.push_back("generator.kind: unknown generator kind '" + e->value + "'");
    } else {
      errors.push_back("generator.kind: required");
    }
    if (const auto* e = raw.get("generator", "scale_fn")) {
      if (e->value != "inverse_quadratic") {
        errors.push_back("generator.scale_fn: only 'inverse_quadratic' is available");
      }
    }
    const auto dim = int_field("generator", "dim");
    const auto horizon = int_field("generator", "horizon");
    if (!dim) errors.push_back("generator.dim: required");
    else if (*dim < 1 || *dim > 64) errors.push_back("generator.dim: must lie in [1, 64]");
    if (!horizon) errors.push_back("generator.horizon: required");
    else if (*horizon < 1) errors.push_back("generator.horizon: must be >= 1");
    const double s_lo = real_field("generator", "s_lo").value_or(1.0);
    const double s_hi = real_field("generator", "s_hi").value_or(1.0);
    if (kind == GeneratorKind::kStateScaled && !(s_lo > 0.0 && s_lo <= s_hi && s_hi <= 1.0)) {
      errors.push_back("generator.s_lo/s_hi: state_scaled requires 0 < s_lo <= s_hi <= 1");
    }

    std::vector<SymMat> matrices;
    bool matrices_ok = dim && *dim >= 1 && *dim <= 64;
    const auto mat_it = raw.sections.at("generator").find("matrix");
    const std::vector<detail::RawEntry> no_entries;
    const auto& entries = mat_it == raw.sections.at("generator").end() ? no_entries : mat_it->second;
    if (entries.empty()) {
      errors.push_back("generator.matrix: at least one matrix is required");
      matrices_ok = false;
    }
    for (std::size_t i = 0; i < entries.size() && dim && *dim >= 1 && *dim <= 64; ++i) {
      const std::string path = "generator.matrix[" + std::to_string(i + 1) + "]";
      auto values = detail::parse_list(entries[i].value, ' ');
      const auto want = static_cast<std::size_t>(*dim * *dim);
      if (!values) {
        errors.push_back(path + ": expected whitespace-separated numbers (line " +
                         std::to_string(entries[i].line) + ")");
        matrices_ok = false;
        continue;
      }
      if (values->size() != want) {
        errors.push_back(path + ": expected " + std::to_string(want) + " entries, got " +
                         std::to_string(values->size()));
        matrices_ok = false;
        continue;
      }
      try {
        matrices.emplace_back(static_cast<std::size_t>(*dim), std::move(*values));
      } catch (const DomainError& ex) {
        errors.push_back(path + ": not symmetric or not finite (" + ex.what() + ")");
        matrices_ok = false;
      }
    }
    if (horizon && *horizon >= 1 && matrices_ok) {
      if (matrices.size() == 1 && *horizon > 1) {
        matrices.assign(static_cast<std::size_t>(*horizon), matrices.front());
      } else if (matrices.size() != static_cast<std::size_t>(*horizon)) {
        errors.push_back("generator.matrix: expected 1 or " + std::to_string(*horizon) +
                         " matrices, got " + std::to_string(matrices.size()));
        matrices_ok = false;
      }
    }
    if (kind && matrices_ok && horizon && *horizon >= 1 &&
        !(kind == GeneratorKind::kStateScaled && !(s_lo > 0.0 && s_lo <= s_hi && s_hi <= 1.0))) {
      cfg.generator.emplace(*kind, std::move(matrices), s_lo, s_hi);
    }
  } else if (needs_generator) {
    errors.push_back("generator: section [generator] required for command '" + cfg.command + "'");
  }

  // -- per-command requirements and resolved defaults
  if (cfg.generator) {
    const int gdim = static_cast<int>(cfg.generator->dim());
    if (!p.d) p.d = gdim;
    else if (*p.d != gdim && needs_generator) {
      errors.push_back("params.d: " + std::to_string(*p.d) + " does not match generator.dim " +
                       std::to_string(gdim));
    }
    const double c_min = min_bernstein_c(*cfg.generator);
    if (!p.c) {
      if (c_min > 0.0) p.c = c_min;
      else errors.push_back("params.c: required (generator has zero certified constant)");
    } else if (*p.c < c_min * (1.0 - 1e-12) && needs_generator && cfg.command != "check-condition") {
      errors.push_back("params.c: " + std::to_string(*p.c) +
                       " is below the generator's certified Bernstein constant " + std::to_string(c_min));
    }
    if (!p.n) p.n = cfg.generator->horizon();
    else if (*p.n > cfg.generator->horizon() && needs_generator) {
      errors.push_back("params.n: exceeds generator.horizon");
    }
  }
  const auto& cmd = cfg.command;
  if (cmd == "bound" || cmd == "tail" || cmd == "union-tail" || cmd == "simulate") {
    if (p.x.empty()) errors.push_back("params.x: required for command '" + cmd + "'");
    if (p.y.empty()) errors.push_back("params.y: required for command '" + cmd + "'");
  }
  if (cmd == "bound") {
    if (!p.c) errors.push_back("params.c: required for command 'bound'");
    if (!p.n) errors.push_back("params.n: required for command 'bound'");
    if (!p.d) errors.push_back("params.d: required for command 'bound'");
  }
  if (cmd == "lemmas") {
    if (!p.d) errors.push_back("params.d: required for command 'lemmas'");
    else if (*p.d > 64) errors.push_back("params.d: must be <= 64");
  }
  if (cmd == "key-step" && p.tc.empty() && !p.t && (p.x.empty() || p.y.empty())) {
    errors.push_back("params: key-step needs tc, t, or an (x, y) grid");
  }
  if (p.c && *p.c > 0.0) {
    if (p.t && !(*p.t > 0.0 && *p.c * *p.t < 1.0)) {
      std::ostringstream os;
      os << "params.t: violates 0<ct<1 (c=" << *p.c << ", t=" << *p.t << ", ct=" << *p.c * *p.t << ")";
      errors.push_back(os.str());
    }
    for (std::size_t i = 0; i < p.tc.size(); ++i) {
      if (!(p.tc[i] > 0.0 && p.tc[i] < 1.0)) {
        errors.push_back("params.tc[" + std::to_string(i) + "]: violates 0<ct<1");
      }
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

}  // namespace matbern
