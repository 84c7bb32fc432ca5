#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/csv.hpp"
#include "cli/scenario.hpp"

namespace leafhol::cli {

struct Metric {
  std::string name;
  double value = 0.0;
  std::optional<Tolerance> tolerance;  // after --tol-scale
  bool pass = true;
};

struct RunOptions {
  std::optional<double> step;
  double tol_scale = 1.0;  // multiplies upper bounds only
};

struct RunResult {
  std::vector<Metric> metrics;
  std::vector<Table> tables;  // metrics.csv is rendered separately
  bool passed = true;
};

/// Runs the task and grades its metrics. Throws InputError when a tolerance
/// names a metric the task does not produce.
RunResult execute(const Scenario& scenario, const RunOptions& options);

Table metrics_table(const RunResult& result);

struct CommandOptions {
  std::string target;
  std::filesystem::path out_dir = "leafhol-out";
  bool timestamp = true;
  std::optional<std::uint64_t> seed;
  RunOptions run;
};

/// 0: all tolerances met, 1: some tolerance failed, 2: input error (nothing written).
int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err);

int list_command(std::ostream& out);

}  // namespace leafhol::cli
