#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>

#include "matbern/runner.hpp"

using namespace matbern;

namespace {

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line.front() != '#') out.push_back(line);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else cur += ch;
  }
  out.push_back(cur);
  return out;
}

const char* kBound =
    "command = bound\nseed = 1\n[params]\nx = 0.25, 0.5, 1, 2\ny = 1\nc = 1\nn = 10\nd = 2\n";

const char* kTail =
    "command = tail\nseed = 17\ntrials = 4000\n[params]\nx = 0.1, 0.3\ny = 0.5, 1\n"
    "[generator]\nkind = state_scaled\ndim = 2\nhorizon = 5\ns_lo = 0.4\ns_hi = 1\n"
    "matrix = 0.6 0.2 0.2 -0.3\n";

}  // namespace

TEST(Runner, BoundRowsLeaveMonteCarloCellsEmpty) {
  const auto cfg = parse_config(kBound);
  const auto res = run(cfg);
  EXPECT_TRUE(res.all_pass());
  ASSERT_EQ(res.rows.size(), 4u);
  ASSERT_EQ(res.summaries.size(), 4u);
  const auto lines = data_lines(render_csv(cfg, res.rows));
  ASSERT_EQ(lines.size(), 5u);
  const auto header = split_fields(lines[0]);
  EXPECT_EQ(header, csv_columns());
  EXPECT_EQ(header.size(), 15u);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    ASSERT_EQ(f.size(), 15u);
    EXPECT_EQ(f[0], "bound");
    for (std::size_t col : {7u, 8u, 9u, 10u}) EXPECT_TRUE(f[col].empty()) << lines[i];
    EXPECT_FALSE(f[11].empty());
    EXPECT_FALSE(f[12].empty());
  }
  EXPECT_EQ(res.summaries[0].rfind("PASS", 0), 0u);
}

TEST(Runner, CsvMetadataHeader) {
  const auto cfg = parse_config(kBound);
  const auto csv = render_csv(cfg, run(cfg).rows);
  EXPECT_EQ(csv.rfind("# matbern ", 0), 0u);
  EXPECT_NE(csv.find("# config_digest=fnv1a64:"), std::string::npos);
  EXPECT_NE(csv.find("# command=bound seed=1"), std::string::npos);
}

TEST(Runner, DeterministicAcrossWorkerCounts) {
  auto one = parse_config(kTail);
  auto three = parse_config(kTail);
  one.workers = 1;
  three.workers = 3;
  const auto a = render_csv(one, run(one).rows);
  const auto b = render_csv(three, run(three).rows);
  const auto again = render_csv(one, run(one).rows);
  EXPECT_EQ(strip_wall_ms(a), strip_wall_ms(b));
  EXPECT_EQ(strip_wall_ms(a), strip_wall_ms(again));
  EXPECT_EQ(data_lines(a).size(), 5u);
}

TEST(Runner, TailVerdicts) {
  const auto res = run(parse_config(kTail));
  EXPECT_TRUE(res.all_pass());
  for (const auto& r : res.rows) {
    ASSERT_TRUE(r.p_hat && r.se && r.bound_product);
    EXPECT_LE(*r.p_hat, *r.bound_product + 3.0 * *r.se);
    EXPECT_EQ(*r.trials, 4000);
  }
}

TEST(Runner, LemmasSchema) {
  const auto cfg = parse_config("command = lemmas\nseed = 2\ntrials = 50\n[params]\nd = 3\n");
  const auto res = run(cfg);
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_TRUE(res.all_pass());
  const char* names[] = {"trace_monotone", "lieb_concavity", "lieb_expectation", "log_monotone"};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(*res.rows[i].hits, 0);
    EXPECT_EQ(*res.rows[i].trials, 50);
    EXPECT_TRUE(res.rows[i].p_hat.has_value());
    EXPECT_NE(res.summaries[i].find(names[i]), std::string::npos);
  }
  const auto csv = render_csv(cfg, res.rows);
  EXPECT_NE(csv.find("hits = violations, p_hat = worst_slack"), std::string::npos);
}

TEST(Runner, CheckConditionReportsViolation) {
  const auto good = run(parse_config(
      "command = check-condition\nseed = 1\np_max = 12\n"
      "[generator]\nkind = rademacher_series\ndim = 2\nhorizon = 1\nmatrix = 2 0 0 2\n"));
  EXPECT_TRUE(good.all_pass());
  const auto bad = run(parse_config(
      "command = check-condition\nseed = 1\np_max = 4\n[params]\nc = 0.5\n"
      "[generator]\nkind = rademacher_series\ndim = 2\nhorizon = 1\nmatrix = 2 0 0 2\n"));
  EXPECT_FALSE(bad.all_pass());
  EXPECT_EQ(bad.failures, 1);
  EXPECT_NE(bad.summaries[0].find("p=4"), std::string::npos);
}

TEST(Runner, KeyStepRowPerTilt) {
  const auto res = run(parse_config(
      "command = key-step\nseed = 5\ntrials = 5\np_max = 10\n[params]\ntc = 0.1, 0.5, 0.9\n"
      "[generator]\nkind = gaussian_series\ndim = 2\nhorizon = 3\nmatrix = 1 0.5 0.5 -1\n"));
  ASSERT_EQ(res.rows.size(), 3u);
  EXPECT_TRUE(res.all_pass());
  EXPECT_NEAR(*res.rows[2].t * *res.rows[2].c, 0.9, 1e-15);
}

TEST(Runner, SimulateAndUnionTail) {
  const std::string gen =
      "[generator]\nkind = rademacher_series\ndim = 2\nhorizon = 4\nmatrix = 0.5 0.1 0.1 0.4\n";
  const auto sim = run(parse_config("command = simulate\nseed = 3\ntrials = 3000\n[params]\nx = 0.2\ny = 1\n" + gen));
  EXPECT_TRUE(sim.all_pass());
  EXPECT_EQ(*sim.rows[0].bound_product, 2.0);
  const auto uni = run(parse_config("command = union-tail\nseed = 3\ntrials = 3000\n[params]\nx = 0.2\ny = 1\n" + gen));
  EXPECT_TRUE(uni.all_pass());
  EXPECT_EQ(uni.summaries[0].rfind("REPORT", 0), 0u);
}

TEST(Runner, NumericFieldsRoundTrip) {
  SplitMix64 eng(80);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(uniform01(eng), static_cast<int>(eng() % 200) - 100);
    const auto text = detail::format_real(v);
    EXPECT_EQ(std::strtod(text.c_str(), nullptr), v);
  }
  const auto cfg = parse_config(kBound);
  const auto rows = run(cfg).rows;
  const auto lines = data_lines(render_csv(cfg, rows));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto f = split_fields(lines[i + 1]);
    EXPECT_EQ(std::strtod(f[3].c_str(), nullptr), *rows[i].x);
    EXPECT_EQ(std::strtod(f[6].c_str(), nullptr), *rows[i].t);
    EXPECT_EQ(std::strtod(f[11].c_str(), nullptr), *rows[i].bound_product);
    EXPECT_EQ(std::strtod(f[12].c_str(), nullptr), *rows[i].bound_exp);
  }
}

TEST(Runner, CsvQuoting) {
  EXPECT_EQ(detail::csv_field("plain"), "plain");
  EXPECT_EQ(detail::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(detail::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}
