#pragma once

// Scenario configuration files.
//
// A scenario is a JSON object:
//
//   {
//     "name": "sl2_iid_unipotent",
//     "seed": 1,
//     "group": {"kind": "SL", "dim": 2},
//     "driver": {"kind": "iid", "probabilities": ["0.5", "0.5"]},
//     "representation": {"matrices": [[["1", "1"], ["0", "1"]], [["1", "0"], ["1", "1"]]]},
//     "transforms": [],
//     "estimators": ["kingman_qr", "iwasawa_formula"],
//     "estimator": {"n_steps": 100000, "n_trajectories": 64, "burn_in": 1000},
//     "output": {"record": "sl2.json", "curve": "sl2.csv"}
//   }
//
// Reals are strings holding a decimal ("0.25", "-1e-3") or a ratio of two
// decimals ("1/3"). Integers are plain JSON integers. Unknown keys are
// errors. All failures raise ConfigError.
//
// Drivers:
//   {"kind": "iid", "probabilities": [p_0, ...]}
//   {"kind": "markov", "transition": [[...], ...], "stationary": [...]}   stationary optional
//   {"kind": "rotation", "alpha": a, "breakpoints": [b_0, ...]}
//
// Representations:
//   {"matrices": [M_0, ...]}                      one matrix per driver symbol
//   {"family": "sl2_shear", "theta": t}           g_1 = [[1, 1 + t], [0, 1]], g_2 = [[1, 0], [1, 1]]
//   {"family": "conjugated", "theta": t, "matrices": [...]}
//                                                 u M_i u^-1 with u = I + t E_{1,2} (SL)
//                                                 or u = I + t E_{1,m+1} (Sp, d = 2m)
//   {"family": "constant", "theta": t, "matrices": [...]}   ignores t
//
// Transforms, applied in order:
//   {"op": "induce", "cylinders": [[s_0, s_1, ...], ...]}
//   {"op": "conjugate", "table": [S_0, ...]}
//   {"op": "suspend", "roof": [r_0, ...], "delta": d}   must be followed by
//   {"op": "discretize", "t": t}  or  {"op": "cross_section"}

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lyaplab/drivers.hpp"
#include "lyaplab/engine.hpp"
#include "lyaplab/stream.hpp"

namespace lyaplab {

// Decimal or "p/q"; throws ConfigError.
double parse_real(const std::string& text);

struct DriverSpec {
  DriverKind kind = DriverKind::IID;
  std::vector<double> probabilities;
  Eigen::MatrixXd transition;
  std::vector<double> stationary;
  double alpha = 0.0;
  std::vector<double> breakpoints;
};

struct RepresentationSpec {
  // Empty for an explicit table.
  std::string family;
  double theta = 0.0;
  std::vector<Mat> matrices;

  bool parametric() const { return !family.empty(); }
};

struct TransformSpec {
  enum class Op { Induce, Conjugate, Suspend, Discretize, CrossSection };
  Op op = Op::Induce;
  std::vector<std::vector<std::size_t>> cylinders;
  std::vector<Mat> table;
  std::vector<double> roof;
  double delta = 0.0;
  double t = 0.0;
};

struct ScenarioSpec {
  std::string name;
  std::uint64_t seed = 0;
  GroupModel model = GroupModel::special_linear(2);
  DriverSpec driver;
  RepresentationSpec representation;
  std::vector<TransformSpec> transforms;
  std::vector<EstimatorMethod> estimators{EstimatorMethod::KingmanQR};
  EstimatorConfig estimator;
  std::optional<std::string> record_path;
  std::optional<std::string> curve_path;
  // Canonical digest of the source text.
  std::string digest;
};

ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::filesystem::path& path);

std::vector<std::string> family_names();
// Representation at theta (the scenario's own theta for explicit tables).
Representation build_representation(const ScenarioSpec& spec, double theta);
Representation build_representation(const ScenarioSpec& spec);

struct BuiltSource {
  std::shared_ptr<const IncrementSource> source;
  // Side estimates produced while building (set measure, roof integral).
  std::map<std::string, double> diagnostics;
};

// Driver plus transform chain, with estimator settings from cfg for any
// pilot runs.
BuiltSource build_source(const ScenarioSpec& spec, double theta, const EstimatorConfig& cfg);

}  // namespace lyaplab
