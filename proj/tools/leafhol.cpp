#include <iostream>

#include "CLI11.hpp"
#include "cli/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"leafhol: anchored bundles, rho-lifts and leafwise holonomy"};
  app.require_subcommand(1);

  leafhol::cli::CommandOptions opts;
  std::string out_dir = opts.out_dir.string();
  bool no_timestamp = false;
  double step = 0.0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run a scenario file or built-in scenario");
  run->add_option("scenario", opts.target, "Scenario JSON file or built-in name")->required();
  auto* step_opt = run->add_option("--step", step, "Override the integration step");
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out-dir", out_dir, "Artifact directory")->capture_default_str();
  run->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp header line from CSV artifacts");
  run->add_option("--tol-scale", opts.run.tol_scale, "Multiply every upper-bound tolerance")->capture_default_str();

  auto* list = app.add_subcommand("list", "List built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) return leafhol::cli::list_command(std::cout);

  opts.out_dir = out_dir;
  opts.timestamp = !no_timestamp;
  if (*step_opt) opts.run.step = step;
  if (*seed_opt) opts.seed = seed;
  (void)run;
  return leafhol::cli::run_command(opts, std::cout, std::cerr);
}
