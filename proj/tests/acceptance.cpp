// Acceptance run: one PASS/FAIL line per criterion on stdout, property
// tables on stderr.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lyaplab/suites.hpp"

#ifndef LYAPLAB_BIN
#error "LYAPLAB_BIN must point at the lyaplab executable"
#endif

namespace {

using lyaplab::PropertyResult;

struct Outcome {
  bool pass = false;
  std::string note;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome from_suite(const std::vector<PropertyResult>& results) {
  std::cerr << lyaplab::format_table(results);
  int failed = 0;
  for (const auto& r : results) failed += r.status != lyaplab::PropertyStatus::Pass;
  return {failed == 0, std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " properties"};
}

// Runs `lyaplab check all` and returns {exit code, stdout, record}.
struct CheckRun {
  int rc = -1;
  std::string table;
  std::string record;
};

CheckRun run_check(const std::filesystem::path& dir, const std::string& tag, int threads) {
  const auto out = dir / (tag + ".json");
  const auto table = dir / (tag + ".txt");
  const std::string cmd = std::string("\"") + LYAPLAB_BIN + "\" check all --seed 7 --threads " +
                          std::to_string(threads) + " --out \"" + out.string() + "\" > \"" + table.string() + "\"";
  CheckRun r;
  r.rc = std::system(cmd.c_str());
  r.table = slurp(table);
  r.record = slurp(out);
  return r;
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "lyaplab_acceptance";
  std::filesystem::create_directories(dir);
  const CheckRun a = run_check(dir, "serial_a", 1);
  const CheckRun b = run_check(dir, "serial_b", 1);
  const CheckRun c = run_check(dir, "threads8", 8);
  std::filesystem::remove_all(dir);

  if (a.rc != 0 || b.rc != 0 || c.rc != 0) return {false, "check all exited non-zero"};
  if (a.record.empty()) return {false, "no record written"};
  if (a.record != b.record || a.table != b.table) return {false, "reruns differ"};
  // No wall clock or thread count is recorded, so the numbers must match byte for byte.
  if (a.record != c.record || a.table != c.table) return {false, "serial and 8-thread runs differ"};
  return {true, "reruns and 8-thread run byte-identical (" + std::to_string(a.record.size()) + " bytes)"};
}

}  // namespace

int main() {
  const lyaplab::SuiteOptions opts{7, 1};
  struct Criterion {
    const char* id;
    const char* title;
    double limit_seconds;  // 0 when no runtime limit applies
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1", "algebraic identities", 30.0, [&] { return from_suite(lyaplab::liealg_identities(opts)); }},
      {"2", "diagonal iid exactness", 60.0, [&] { return from_suite(lyaplab::diagonal_exactness(opts)); }},
      {"3", "estimator agreement", 300.0, [&] { return from_suite(lyaplab::estimator_agreement(opts)); }},
      {"4", "transform laws", 600.0, [&] { return from_suite(lyaplab::transform_laws(opts)); }},
      {"5", "drift dichotomy", 0.0, [&] { return from_suite(lyaplab::drift_dichotomy(opts)); }},
      {"6", "continuity sweep", 0.0, [&] { return from_suite(lyaplab::continuity(opts)); }},
      {"7", "determinism", 0.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char timing[96];
    if (c.limit_seconds > 0.0) {
      if (secs >= c.limit_seconds) {
        o.pass = false;
        o.note += ", over time limit";
      }
      std::snprintf(timing, sizeof timing, "%.1f s, limit %.0f s", secs, c.limit_seconds);
    } else {
      std::snprintf(timing, sizeof timing, "%.1f s", secs);
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.note << " ["
              << timing << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
