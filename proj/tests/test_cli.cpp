#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lyaplab/cli.hpp"
#include "lyaplab/errors.hpp"

using namespace lyaplab;
namespace fs = std::filesystem;

#ifndef LYAPLAB_SCENARIOS
#error "LYAPLAB_SCENARIOS must name the scenario directory"
#endif

namespace {

const fs::path kScenarios = LYAPLAB_SCENARIOS;

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lyaplab_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallDiagonal = R"({
  "name": "small_diagonal",
  "seed": 3,
  "group": {"kind": "SL", "dim": 2},
  "driver": {"kind": "iid", "probabilities": ["0.5", "0.5"]},
  "representation": {"matrices": [[["2", "0"], ["0", "0.5"]], [["3", "0"], ["0", "1/3"]]]},
  "estimators": ["kingman_qr", "iwasawa_formula"],
  "estimator": {"n_steps": 4000, "n_trajectories": 6, "burn_in": 500}
})";

ScenarioSpec shrunk(const fs::path& path) {
  ScenarioSpec spec = load_scenario(path);
  spec.estimator.n_steps = 3000;
  spec.estimator.n_trajectories = 4;
  spec.estimator.burn_in = 500;
  return spec;
}

}  // namespace

TEST_CASE("every shipped scenario parses") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_scenario(entry.path()));
    ++count;
  }
  CHECK(count >= 10);

  const ScenarioSpec sl3 = load_scenario(kScenarios / "sl3_generic.json");
  REQUIRE(sl3.representation.matrices.size() == 2);
  Mat a(3, 3);
  a << 2, 1, 0, 1, 1, 0, 0, 0, 1;
  CHECK(sl3.representation.matrices[0] == a);

  const ScenarioSpec shear = load_scenario(kScenarios / "sl2_shear_family.json");
  CHECK(shear.representation.parametric());
  CHECK(shear.representation.family == "sl2_shear");

  const ScenarioSpec diag = load_scenario(kScenarios / "diagonal_iid.json");
  CHECK(diag.representation.matrices[1](1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(diag.estimator.n_steps == 100000);
  CHECK(diag.estimator.n_trajectories == 64);
}

TEST_CASE("identity scenario runs to an exact zero spectrum") {
  TempDir tmp;
  RunOptions opts;
  opts.out = (tmp.path / "identity.json").string();
  opts.quiet = true;
  std::ostringstream out, err;
  REQUIRE(cmd_run((kScenarios / "identity.json").string(), opts, out, err) == kExitOk);
  CHECK(out.str().empty());
  const RunRecord rec = read_run(*opts.out);
  REQUIRE(rec.scenarios.size() == 1);
  CHECK(rec.scenarios[0].estimates.size() == 3);
  for (const auto& e : rec.scenarios[0].estimates) {
    for (int i = 0; i < e.lambda.size(); ++i) CHECK(e.lambda[i] == 0.0);
  }
  CHECK_FALSE(rec.wall_clock_seconds.has_value());
}

TEST_CASE("without --out the record goes to stdout") {
  RunOptions opts;
  opts.quiet = true;
  std::ostringstream out, err;
  REQUIRE(cmd_run((kScenarios / "identity.json").string(), opts, out, err) == kExitOk);
  const RunRecord rec = run_from_json(out.str());
  CHECK(rec.seed == 1);
  CHECK(err.str().empty());
}

TEST_CASE("configuration errors exit 3 and write nothing") {
  TempDir tmp;
  RunOptions opts;
  opts.out = (tmp.path / "never.json").string();
  std::ostringstream out, err;

  SUBCASE("malformed JSON") {
    CHECK(cmd_run(tmp.write("bad.json", "{\"name\": ").string(), opts, out, err) == kExitConfig);
  }
  SUBCASE("missing file") {
    CHECK(cmd_run((tmp.path / "absent.json").string(), opts, out, err) == kExitConfig);
  }
  SUBCASE("unknown key") {
    std::string text = kSmallDiagonal;
    text.insert(1, "\"colour\": \"red\", ");
    CHECK(cmd_run(tmp.write("key.json", text).string(), opts, out, err) == kExitConfig);
    CHECK(err.str().find("colour") != std::string::npos);
  }
  SUBCASE("suspension without discretize or cross section") {
    std::string text = kSmallDiagonal;
    text.insert(1, R"("transforms": [{"op": "suspend", "roof": ["1", "1"], "delta": "0.5"}], )");
    CHECK(cmd_run(tmp.write("susp.json", text).string(), opts, out, err) == kExitConfig);
  }
  SUBCASE("sweep over an unknown parameter") {
    CHECK(cmd_sweep((kScenarios / "sl2_shear_family.json").string(), "alpha", {"0"}, opts, out, err) == kExitConfig);
  }
  SUBCASE("sweep over a non-parametric scenario") {
    CHECK(cmd_sweep(tmp.write("d.json", kSmallDiagonal).string(), "theta", {"0"}, opts, out, err) == kExitConfig);
  }
  SUBCASE("unknown suite") {
    CHECK(cmd_check("no-such-suite", opts, out, err) == kExitConfig);
  }
  SUBCASE("zero threads") {
    opts.threads = 0;
    CHECK(cmd_run(tmp.write("d.json", kSmallDiagonal).string(), opts, out, err) == kExitConfig);
  }
  CHECK_FALSE(fs::exists(*opts.out));
}

TEST_CASE("reruns are byte-identical and independent of threads") {
  TempDir tmp;
  const std::string config = tmp.write("d.json", kSmallDiagonal).string();
  RunOptions opts;
  opts.quiet = true;
  std::ostringstream a, b, c, err;
  REQUIRE(cmd_run(config, opts, a, err) == kExitOk);
  REQUIRE(cmd_run(config, opts, b, err) == kExitOk);
  opts.threads = 3;
  REQUIRE(cmd_run(config, opts, c, err) == kExitOk);
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str());

  opts.seed = 4;
  std::ostringstream d;
  REQUIRE(cmd_run(config, opts, d, err) == kExitOk);
  CHECK(a.str() != d.str());
}

TEST_CASE("overrides") {
  ScenarioSpec spec = load_scenario(kScenarios / "identity.json");
  RunOptions opts;
  opts.seed = 99;
  opts.threads = 2;
  opts.checkpoint_every = 500;
  const ScenarioSpec s = apply_overrides(spec, opts);
  CHECK(s.seed == 99);
  CHECK(s.estimator.seed == 99);
  CHECK(s.estimator.threads == 2);
  CHECK(s.estimator.checkpoint_every == 500);
  opts.checkpoint_every = -1;
  CHECK_THROWS_AS(apply_overrides(spec, opts), ConfigError);
}

TEST_CASE("curves are written per estimator") {
  TempDir tmp;
  std::string text = kSmallDiagonal;
  const fs::path curve = tmp.path / "curve.csv";
  text.insert(1, "\"output\": {\"curve\": \"" + curve.string() + "\"}, ");
  RunOptions opts;
  opts.quiet = true;
  opts.out = (tmp.path / "rec.json").string();
  std::ostringstream out, err;
  REQUIRE(cmd_run(tmp.write("c.json", text).string(), opts, out, err) == kExitOk);
  CHECK(fs::exists(tmp.path / "curve.kingman_qr.csv"));
  CHECK(fs::exists(tmp.path / "curve.iwasawa_formula.csv"));
  const std::string csv = slurp(tmp.path / "curve.kingman_qr.csv");
  CHECK(csv.rfind("n,lambda_1,lambda_2,stderr_1,stderr_2\n", 0) == 0);
}

TEST_CASE("a single-value sweep reproduces run") {
  const ScenarioSpec spec = shrunk(kScenarios / "sl2_shear_family.json");
  const RunRecord run = run_scenario(spec);
  const RunRecord sweep = sweep_scenario(spec, {spec.representation.theta});
  REQUIRE(sweep.scenarios.size() == 1);
  CHECK(sweep.scenarios[0].estimates[0].lambda == run.scenarios[0].estimates[0].lambda);
  CHECK(sweep.scenarios[0].theta == run.scenarios[0].theta);
}

TEST_CASE("sweeps use common random numbers") {
  SUBCASE("constant family gives identical rows") {
    const ScenarioSpec spec = shrunk(kScenarios / "constant_family.json");
    const RunRecord rec = sweep_scenario(spec, {0.0, 0.5, 1.0});
    REQUIRE(rec.scenarios.size() == 3);
    CHECK(rec.scenarios[1].estimates[0].lambda == rec.scenarios[0].estimates[0].lambda);
    CHECK(rec.scenarios[2].estimates[0].lambda == rec.scenarios[0].estimates[0].lambda);
    CHECK(rec.diagnostics.at("successive_difference.kingman_qr.000") == 0.0);
  }
  SUBCASE("shear family differences shrink with the grid") {
    const ScenarioSpec spec = shrunk(kScenarios / "sl2_shear_family.json");
    const RunRecord rec = sweep_scenario(spec, {0.0, 0.01, 0.02, 0.03, 0.04});
    REQUIRE(rec.scenarios.size() == 5);
    const double ratio = rec.diagnostics.at("refinement_ratio.kingman_qr");
    CHECK(ratio > 0.3);
    CHECK(ratio < 0.7);
  }
}

TEST_CASE("check reports a table and exit code") {
  TempDir tmp;
  RunOptions opts;
  opts.out = (tmp.path / "check.json").string();
  std::ostringstream out, err;
  REQUIRE(cmd_check("liealg-identities", opts, out, err) == kExitOk);
  CHECK(out.str().find("PASS: liealg-identities") != std::string::npos);
  const RunRecord rec = read_run(*opts.out);
  CHECK(rec.properties.size() == 5);
  CHECK(rec.seed == 7);
}
