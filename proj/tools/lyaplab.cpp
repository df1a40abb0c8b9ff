#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lyaplab/cli.hpp"
#include "lyaplab/suites.hpp"

namespace {

void add_common(CLI::App* cmd, lyaplab::RunOptions& opts) {
  cmd->add_option("--out", opts.out, "Write the run record to this file");
  cmd->add_option("--seed", opts.seed, "Override the master seed");
  cmd->add_option("--threads", opts.threads, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", opts.quiet, "Suppress the summary");
  cmd->add_flag("--timing", opts.timing, "Record wall-clock time in the run record");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov spectrum laboratory"};
  app.require_subcommand(1);

  lyaplab::RunOptions opts;
  std::string config;
  std::string param;
  std::vector<std::string> values;
  std::string suite;

  CLI::App* run = app.add_subcommand("run", "Estimate the spectrum of a scenario");
  run->add_option("config", config, "Scenario JSON file")->required();
  run->add_option("--checkpoint-every", opts.checkpoint_every, "Linear checkpoint spacing");
  add_common(run, opts);

  CLI::App* sweep = app.add_subcommand("sweep", "Estimate along a parameter grid with common random numbers");
  sweep->add_option("config", config, "Scenario JSON file")->required();
  sweep->add_option("--param", param, "Parameter name (theta)")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("--checkpoint-every", opts.checkpoint_every, "Linear checkpoint spacing");
  add_common(sweep, opts);

  CLI::App* check = app.add_subcommand("check", "Run a property suite");
  std::string names = "all";
  for (const auto& n : lyaplab::suite_names()) names += ", " + n;
  check->add_option("suite", suite, "One of: " + names)->required();
  add_common(check, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lyaplab::kExitConfig;
  }

  if (*run) return lyaplab::cmd_run(config, opts, std::cout, std::cerr);
  if (*sweep) return lyaplab::cmd_sweep(config, param, values, opts, std::cout, std::cerr);
  return lyaplab::cmd_check(suite, opts, std::cout, std::cerr);
}
