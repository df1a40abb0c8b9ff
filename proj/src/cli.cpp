#include "lyaplab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>

#include "json.hpp"
#include "lyaplab/errors.hpp"
#include "lyaplab/suites.hpp"

namespace lyaplab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const NumericalFailure& e) {
    err << "lyaplab: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "lyaplab: " << e.what() << "\n";
    return kExitConfig;
  }
}

PropertyResult agreement_property(const SpectrumEstimate& a, const SpectrumEstimate& b) {
  double worst = 0.0;
  for (int i = 0; i < a.lambda.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double diff = std::abs(a.lambda[i] - b.lambda[i]);
    const double se = std::hypot(a.stderr_[k], b.stderr_[k]);
    if (diff > 0.0) worst = std::max(worst, std::min(diff / std::max(se, 1e-300), 1e300));
  }
  PropertyResult r{std::string("agreement.") + to_string(a.method) + ".vs." + to_string(b.method),
                   worst <= 3.0 ? PropertyStatus::Pass : PropertyStatus::Fail,
                   worst,
                   3.0,
                   "<=",
                   "max coordinate difference in combined stderr"};
  return r;
}

PropertyResult simplicity_property(const SpectrumEstimate& est, const GroupModel& model) {
  const SimplicityReport rep = simplicity_report(est, RootSystemInfo::for_model(model));
  PropertyResult r;
  r.name = std::string("simplicity.") + to_string(est.method);
  r.status = rep.verdict == SimplicityVerdict::Simple      ? PropertyStatus::Pass
             : rep.verdict == SimplicityVerdict::NotSimple ? PropertyStatus::Fail
                                                           : PropertyStatus::Inconclusive;
  r.measured = rep.min_gap;
  r.required = 0.0;
  r.comparator = ">=";
  r.detail = std::string("verdict ") + to_string(rep.verdict);
  return r;
}

ScenarioResult run_estimators(const ScenarioSpec& spec, double theta, const BuiltSource& built) {
  ScenarioResult result;
  result.name = spec.name;
  if (spec.representation.parametric()) result.theta = theta;
  result.diagnostics = built.diagnostics;
  for (const EstimatorMethod m : spec.estimators) result.estimates.push_back(estimate(m, *built.source, spec.estimator));
  return result;
}

std::vector<PropertyResult> scenario_properties(const ScenarioSpec& spec, const ScenarioResult& result) {
  std::vector<PropertyResult> out;
  for (std::size_t i = 1; i < result.estimates.size(); ++i) {
    out.push_back(agreement_property(result.estimates[0], result.estimates[i]));
  }
  for (const auto& e : result.estimates) out.push_back(simplicity_property(e, spec.model));
  return out;
}

std::string curve_path_for(const std::string& base, EstimatorMethod method, std::size_t n_estimators) {
  if (n_estimators == 1) return base;
  std::filesystem::path p(base);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + "." + to_string(method) + (ext.empty() ? ".csv" : ext);
}

void print_summary(std::ostream& err, const RunRecord& record) {
  char line[256];
  for (const auto& s : record.scenarios) {
    for (const auto& e : s.estimates) {
      std::string lambda;
      for (int i = 0; i < e.lambda.size(); ++i) {
        std::snprintf(line, sizeof line, "%s%.6f", i ? " " : "", e.lambda[i]);
        lambda += line;
      }
      if (s.theta) {
        std::snprintf(line, sizeof line, "%s theta=%g %-16s lambda = (%s)\n", s.name.c_str(), *s.theta,
                      to_string(e.method), lambda.c_str());
      } else {
        std::snprintf(line, sizeof line, "%s %-16s lambda = (%s)\n", s.name.c_str(), to_string(e.method),
                      lambda.c_str());
      }
      err << line;
    }
  }
  if (!record.properties.empty()) err << format_table(record.properties);
}

// Record goes to the file if given, otherwise to stdout.
void emit(const RunRecord& record, const std::optional<std::string>& path, std::ostream& out) {
  if (path) {
    write_run(record, *path);
  } else {
    out << run_to_json(record);
  }
}

}  // namespace

ScenarioSpec apply_overrides(ScenarioSpec spec, const RunOptions& opts) {
  if (opts.seed) spec.seed = *opts.seed;
  spec.estimator.seed = spec.seed;
  spec.estimator.threads = opts.threads;
  if (opts.checkpoint_every) spec.estimator.checkpoint_every = *opts.checkpoint_every;
  if (opts.out) spec.record_path = *opts.out;
  try {
    spec.estimator.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

RunRecord run_scenario(const ScenarioSpec& spec) {
  RunRecord record;
  record.config_digest = spec.digest;
  record.seed = spec.seed;
  const double theta = spec.representation.theta;
  const BuiltSource built = build_source(spec, theta, spec.estimator);
  record.scenarios.push_back(run_estimators(spec, theta, built));
  record.properties = scenario_properties(spec, record.scenarios.back());
  return record;
}

RunRecord sweep_scenario(const ScenarioSpec& spec, const std::vector<double>& thetas) {
  if (!spec.representation.parametric()) throw ConfigError("sweep needs a parametric representation family");
  if (thetas.empty()) throw ConfigError("sweep needs at least one value");
  RunRecord record;
  record.config_digest = spec.digest;
  record.seed = spec.seed;

  // Common random numbers: every theta sees the same seed and streams.
  std::map<double, BuiltSource> built;
  const SourceFamily family = [&](double theta) {
    auto it = built.find(theta);
    if (it == built.end()) it = built.emplace(theta, build_source(spec, theta, spec.estimator)).first;
    return it->second.source;
  };
  std::vector<SweepTable> tables;
  for (const EstimatorMethod m : spec.estimators) tables.push_back(continuity_sweep(family, thetas, spec.estimator, m));

  for (std::size_t row = 0; row < thetas.size(); ++row) {
    ScenarioResult s;
    s.name = spec.name;
    s.theta = thetas[row];
    s.diagnostics = built.at(thetas[row]).diagnostics;
    for (const SweepTable& t : tables) s.estimates.push_back(t.rows[row].estimate);
    record.properties.reserve(record.properties.size() + s.estimates.size());
    record.scenarios.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const std::string method = to_string(spec.estimators[k]);
    const SweepTable& t = tables[k];
    for (std::size_t i = 0; i < t.successive_differences.size(); ++i) {
      char key[96];
      std::snprintf(key, sizeof key, "successive_difference.%s.%03zu", method.c_str(), i);
      record.diagnostics[key] = t.successive_differences[i];
    }
    if (t.refinement_ratio) record.diagnostics["refinement_ratio." + method] = *t.refinement_ratio;
  }
  if (thetas.size() == 1) record.properties = scenario_properties(spec, record.scenarios.front());
  return record;
}

int cmd_run(const std::string& config_path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    const ScenarioSpec spec = apply_overrides(load_scenario(config_path), opts);
    RunRecord record = run_scenario(spec);
    if (opts.timing) record.wall_clock_seconds = seconds_since(start);
    // Everything is computed before anything is written.
    emit(record, spec.record_path, out);
    if (spec.curve_path) {
      const auto& estimates = record.scenarios.front().estimates;
      for (const auto& e : estimates) convergence_csv(e, curve_path_for(*spec.curve_path, e.method, estimates.size()));
    }
    if (!opts.quiet) print_summary(err, record);
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<std::string>& values,
              const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    if (param != "theta") throw ConfigError("unknown sweep parameter '" + param + "'; the only parameter is 'theta'");
    std::vector<double> thetas;
    for (const auto& v : values) thetas.push_back(parse_real(v));
    const ScenarioSpec spec = apply_overrides(load_scenario(config_path), opts);
    RunRecord record = sweep_scenario(spec, thetas);
    if (opts.timing) record.wall_clock_seconds = seconds_since(start);
    emit(record, spec.record_path, out);
    if (!opts.quiet) {
      print_summary(err, record);
      for (const auto& [key, value] : record.diagnostics) err << key << " = " << value << "\n";
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_check(const std::string& suite, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    SuiteOptions so;
    if (opts.seed) so.seed = *opts.seed;
    so.threads = opts.threads;
    const std::vector<PropertyResult> results = run_suite(suite, so);

    RunRecord record;
    record.config_digest = config_digest(nlohmann::json{{"check", suite}, {"seed", so.seed}}.dump());
    record.seed = so.seed;
    record.properties = results;
    if (opts.timing) record.wall_clock_seconds = seconds_since(start);
    if (opts.out) write_run(record, *opts.out);

    const bool ok = all_pass(results);
    if (!opts.quiet) {
      out << format_table(results);
      out << (ok ? "PASS" : "FAIL") << ": " << suite << " (seed " << so.seed << ")\n";
    }
    return static_cast<int>(ok ? kExitOk : kExitPropertyFailed);
  });
}

}  // namespace lyaplab
