#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lyaplab/errors.hpp"
#include "lyaplab/report.hpp"

using namespace lyaplab;
namespace fs = std::filesystem;

namespace {

const GroupModel kSL2 = GroupModel::special_linear(2);

Representation diagonal_pair() {
  Mat a(2, 2), b(2, 2);
  a << 2, 0, 0, 0.5;
  b << 3, 0, 0, 1.0 / 3.0;
  return {kSL2, {GroupElement::make(kSL2, a), GroupElement::make(kSL2, b)}};
}

SpectrumEstimate diagonal_estimate(std::int64_t n_steps = 20'000) {
  const Representation rep = diagonal_pair();
  auto d = std::make_shared<const GregDriver>(GregDriver::iid(rep, {0.5, 0.5}, 17));
  EstimatorConfig cfg;
  cfg.n_steps = n_steps;
  cfg.n_trajectories = 16;
  cfg.seed = 17;
  return estimate_kingman_qr(d, rep, cfg);
}

RunRecord sample_record() {
  RunRecord r;
  r.config_digest = config_digest(R"({"name": "x"})");
  r.seed = 123;
  ScenarioResult s;
  s.name = "diagonal";
  s.estimates.push_back(diagonal_estimate());
  s.diagnostics["roof_integral"] = 1.5;
  r.scenarios.push_back(s);
  ScenarioResult t;
  t.name = "swept";
  t.theta = 0.01;
  SpectrumEstimate odd = diagonal_estimate(3000);
  odd.method = EstimatorMethod::BlockSVD;
  odd.reordered = true;
  t.estimates.push_back(odd);
  r.scenarios.push_back(t);
  r.properties.push_back({"kac", PropertyStatus::Pass, 1.0000000000000002, 1.0, "in", "mean return x measure"});
  r.properties.push_back({"tiny", PropertyStatus::Inconclusive, 5e-324, -1e300, "<=", ""});
  r.diagnostics["runtime_steps"] = 1e6;
  r.wall_clock_seconds = 0.1 + 0.2;
  return r;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("lyaplab_test_" + name); }

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("run records round-trip exactly") {
  const RunRecord r = sample_record();
  CHECK(run_from_json(run_to_json(r)) == r);
  const fs::path p = temp_path("roundtrip.json");
  write_run(r, p);
  CHECK(read_run(p) == r);
  // Writing is deterministic.
  CHECK(run_to_json(read_run(p)) == run_to_json(r));
  fs::remove(p);
}

TEST_CASE("empty scenario list") {
  RunRecord r;
  const std::string text = run_to_json(r);
  CHECK(text.find("\"scenarios\": []") != std::string::npos);
  CHECK(run_from_json(text) == r);
  CHECK_FALSE(run_from_json(text).wall_clock_seconds.has_value());
}

TEST_CASE("floats are written with 17 significant digits") {
  RunRecord r;
  ScenarioResult s;
  s.name = "diagonal";
  SpectrumEstimate e;
  const double lambda = 0.5 * (std::log(2.0) + std::log(3.0));
  e.lambda = CartanVector::from(std::vector<double>{lambda, -lambda});
  e.per_trajectory = {e.lambda};
  e.stderr_ = {0.0, 0.0};
  s.estimates.push_back(e);
  r.scenarios.push_back(s);
  const std::string text = run_to_json(r);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", lambda);
  CHECK(std::string(buf).size() >= 18);
  CHECK(text.find(buf) != std::string::npos);
  CHECK(text.find(std::string("-") + buf) != std::string::npos);
  CHECK(run_from_json(text) == r);
}

TEST_CASE("schema violations are rejected") {
  const std::string good = run_to_json(sample_record());
  CHECK_THROWS_AS(run_from_json(replace_once(good, "\"schema_version\": 1", "\"schema_version\": 2")), SchemaError);
  CHECK_THROWS_AS(run_from_json(replace_once(good, "\"seed\": 123", "\"seed\": 123, \"future\": 1")), SchemaError);
  CHECK_THROWS_AS(run_from_json(replace_once(good, "\"seed\": 123,", "")), SchemaError);
  CHECK_THROWS_AS(run_from_json(replace_once(good, "\"status\": \"pass\"", "\"status\": \"maybe\"")), SchemaError);
  CHECK_THROWS_AS(run_from_json("{not json"), SchemaError);
  CHECK_THROWS_AS(run_from_json("[]"), SchemaError);
  try {
    run_from_json(replace_once(good, "\"schema_version\": 1", "\"schema_version\": 2"));
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
}

TEST_CASE("io failures") {
  CHECK_THROWS_AS(read_run(temp_path("does_not_exist.json")), IoError);
  CHECK_THROWS_AS(write_run(RunRecord{}, "/nonexistent-dir/record.json"), IoError);
  CHECK_THROWS_AS(convergence_csv(diagonal_estimate(3000), "/nonexistent-dir/curve.csv"), IoError);
}

TEST_CASE("convergence csv") {
  SUBCASE("identity cocycle has zero lambda columns") {
    const Representation rep{kSL2, {GroupElement::identity(kSL2)}};
    auto d = std::make_shared<const GregDriver>(GregDriver::iid(rep, {1.0}, 0));
    EstimatorConfig cfg;
    cfg.n_steps = 5000;
    cfg.n_trajectories = 4;
    const std::string csv = convergence_csv_text(estimate_kingman_qr(d, rep, cfg));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,lambda_1,lambda_2,stderr_1,stderr_2");
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      const auto first = line.find(',');
      CHECK(line.substr(first) == ",0,0,0,0");
    }
    CHECK(rows == 3);  // 1000, 2000, 4000
  }
  SUBCASE("one checkpoint gives one row") {
    const std::string csv = convergence_csv_text(diagonal_estimate(1500));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  }
  SUBCASE("diagonal run final row") {
    const SpectrumEstimate e = diagonal_estimate();
    const fs::path p = temp_path("curve.csv");
    convergence_csv(e, p);
    std::ifstream in(p);
    std::string line, last;
    while (std::getline(in, line)) last = line;
    double n = 0, l1 = 0, l2 = 0, s1 = 0, s2 = 0;
    REQUIRE(std::sscanf(last.c_str(), "%lf,%lf,%lf,%lf,%lf", &n, &l1, &l2, &s1, &s2) == 5);
    const double lambda = 0.5 * (std::log(2.0) + std::log(3.0));
    CHECK(n == 19'000);
    CHECK(std::abs(l1 - lambda) <= 3 * s1);
    CHECK(std::abs(l2 + lambda) <= 3 * s2);
    fs::remove(p);
  }
}

TEST_CASE("config digest") {
  CHECK(config_digest("{}") == "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a");
  CHECK(config_digest(R"({"b": 1, "a": [1, 2]})") == config_digest("{\"a\":[1,2],\n \"b\":1}"));
  CHECK(config_digest(R"({"a": 1})") != config_digest(R"({"a": 2})"));
  CHECK_THROWS_AS(config_digest("{"), ConfigError);
}

TEST_CASE("property status names") {
  for (const PropertyStatus s : {PropertyStatus::Pass, PropertyStatus::Fail, PropertyStatus::Inconclusive}) {
    CHECK(parse_property_status(to_string(s)) == s);
  }
  CHECK_THROWS(parse_property_status("unknown"));
}
