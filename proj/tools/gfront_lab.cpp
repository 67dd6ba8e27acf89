// Experiment lab CLI: one subcommand per experiment plus `report`.
// Exit codes: 0 success, 2 budget truncation (partial results), 1 config or
// runtime error.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gfront/harness.hpp"

namespace {

struct Args {
  std::string config_path;
  std::string out_dir = "results";
  std::string seeds = "0..8";
  int workers = 1;
  bool report_after = false;
};

void attach_run_options(CLI::App* sub, Args* args) {
  sub->add_option("--config", args->config_path,
                  "flat key = value config file");
  sub->add_option("--out", args->out_dir, "results directory");
  sub->add_option("--seeds", args->seeds, "half-open seed range A..B");
  sub->add_option("--workers", args->workers, "worker threads (seeds only)")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--report", args->report_after,
                "rebuild the full report after the run");
}

std::pair<uint64_t, uint64_t> parse_seed_range(const std::string& s) {
  size_t dots = s.find("..");
  if (dots == std::string::npos)
    throw gfront::ConfigError("--seeds expects A..B, got '" + s + "'");
  size_t pos = 0;
  uint64_t a = std::stoull(s.substr(0, dots), &pos);
  if (pos != dots)
    throw gfront::ConfigError("--seeds expects A..B, got '" + s + "'");
  uint64_t b = std::stoull(s.substr(dots + 2), &pos);
  if (pos != s.size() - dots - 2)
    throw gfront::ConfigError("--seeds expects A..B, got '" + s + "'");
  return {a, b};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for front propagation experiments"};
  app.require_subcommand(1);

  const char* experiments[] = {"waiting-time-tail", "flux-tail",
                               "cluster-stats",     "shape-estimate",
                               "homog-rate",        "skeleton-validate"};
  Args args;
  for (const char* name : experiments)
    attach_run_options(app.add_subcommand(name, name), &args);
  CLI::App* report_cmd =
      app.add_subcommand("report", "rebuild summary tables and plots");
  report_cmd->add_option("--out", args.out_dir, "results directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report_cmd->parsed()) {
      std::cout << gfront::build_report(args.out_dir);
      return 0;
    }
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    gfront::Config cfg;
    if (!args.config_path.empty())
      cfg = gfront::Config::parse_file(args.config_path);
    if (cfg.has("experiment") && cfg.get_string("experiment") != name)
      throw gfront::ConfigError("config sets experiment = " +
                                cfg.get_string("experiment") +
                                " but the subcommand is " + name);
    cfg.set("experiment", name);
    auto [a, b] = parse_seed_range(args.seeds);
    gfront::RunSummary sum =
        gfront::run_experiment(cfg, args.out_dir, a, b, args.workers);
    std::cout << "run " << sum.experiment << " [" << sum.digest << "] -> "
              << sum.dir << "\n";
    std::cout << "seeds done = " << sum.seeds_done
              << ", skipped = " << sum.seeds_skipped
              << (sum.truncated ? ", TRUNCATED by budget" : "") << "\n";
    for (const auto& [k, v] : sum.stats)
      std::cout << "  " << k << " = " << v << "\n";
    if (args.report_after) std::cout << gfront::build_report(args.out_dir);
    return sum.truncated ? 2 : 0;
  } catch (const gfront::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
