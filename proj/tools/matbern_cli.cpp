// matbern_cli <command> --config <path> [--seed N] [--workers N] [--out <path>]
//
// Exit status: 0 when every acceptance comparison passes, 1 when any fails,
// 2 on usage, config or runtime errors.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "matbern/config.hpp"
#include "matbern/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bernstein bounds for matrix martingales: bound calculators and Monte Carlo checks"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_path;

  for (const auto& name : matbern::known_commands()) {
    auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "CSV output path (default: config `output`, else stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::ifstream in(config_path);
  std::stringstream buf;
  buf << in.rdbuf();

  try {
    auto cfg = matbern::parse_config(buf.str(), command);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (!out_path.empty()) cfg.output_path = out_path;

    const auto result = matbern::run(cfg);
    const std::string csv = matbern::render_csv(cfg, result.rows);
    if (cfg.output_path.empty()) {
      std::cout << csv;
      for (const auto& s : result.summaries) std::cerr << s << '\n';
    } else {
      std::ofstream out(cfg.output_path, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot open " << cfg.output_path << " for writing\n";
        return 2;
      }
      out << csv;
      if (!out.flush()) {
        std::cerr << "error: write to " << cfg.output_path << " failed\n";
        return 2;
      }
      for (const auto& s : result.summaries) std::cout << s << '\n';
    }
    return result.all_pass() ? 0 : 1;
  } catch (const matbern::ConfigError& e) {
    std::cerr << "config errors in " << config_path << ":\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
