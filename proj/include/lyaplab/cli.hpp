#pragma once

// Commands behind the `lyaplab` executable. Exit codes:
//   0  success
//   1  check: some property did not pass
//   2  numerical failure during estimation
//   3  configuration, input or output error (nothing is written)

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lyaplab/config.hpp"
#include "lyaplab/report.hpp"

namespace lyaplab {

enum ExitCode : int { kExitOk = 0, kExitPropertyFailed = 1, kExitNumerical = 2, kExitConfig = 3 };

struct RunOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<std::int64_t> checkpoint_every;
  bool quiet = false;
  bool timing = false;
};

// Applies command-line overrides to a loaded scenario.
ScenarioSpec apply_overrides(ScenarioSpec spec, const RunOptions& opts);

RunRecord run_scenario(const ScenarioSpec& spec);
RunRecord sweep_scenario(const ScenarioSpec& spec, const std::vector<double>& thetas);

int cmd_run(const std::string& config_path, const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<std::string>& values,
              const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_check(const std::string& suite, const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace lyaplab
