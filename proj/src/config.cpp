#include "lyaplab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lyaplab/errors.hpp"
#include "lyaplab/report.hpp"
#include "lyaplab/transforms.hpp"

namespace lyaplab {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

double parse_decimal(const std::string& text, const std::string& whole) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) throw ConfigError("'" + whole + "' is not a decimal number");
  if (!std::isfinite(value)) throw ConfigError("'" + whole + "' is not finite");
  return value;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) fail(where, std::string("missing key '") + k + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
  }
}

double real_at(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "reals must be written as strings");
  try {
    return parse_real(j.get<std::string>());
  } catch (const ConfigError& e) {
    fail(where, e.what());
  }
}

std::vector<double> reals_at(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of reals");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real_at(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::int64_t int_at(const json& j, const std::string& where, std::int64_t min_value) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  const std::int64_t v = j.get<std::int64_t>();
  if (v < min_value) fail(where, "must be at least " + std::to_string(min_value));
  return v;
}

std::string string_at(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Mat matrix_at(const json& j, const std::string& where, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(where, "expected " + std::to_string(dim) + " rows");
  Mat m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    const std::vector<double> row = reals_at(j[static_cast<std::size_t>(r)], row_where);
    if (static_cast<int>(row.size()) != dim) fail(row_where, "expected " + std::to_string(dim) + " entries");
    for (int c = 0; c < dim; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

std::vector<Mat> matrices_at(const json& j, const std::string& where, const GroupModel& model) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of matrices");
  std::vector<Mat> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    Mat m = matrix_at(j[i], w, model.dim);
    try {
      (void)GroupElement::make(model, m);
    } catch (const Error& e) {
      fail(w, e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

GroupModel parse_group(const json& j) {
  check_keys(j, "group", {"kind", "dim"});
  const std::string kind = string_at(j["kind"], "group.kind");
  const int dim = static_cast<int>(int_at(j["dim"], "group.dim", 2));
  try {
    if (kind == "SL") return GroupModel::special_linear(dim);
    if (kind == "Sp") return GroupModel::symplectic(dim);
  } catch (const Error& e) {
    fail("group", e.what());
  }
  fail("group.kind", "expected \"SL\" or \"Sp\", got \"" + kind + "\"");
}

DriverSpec parse_driver(const json& j) {
  if (!j.is_object() || !j.contains("kind")) fail("driver", "missing key 'kind'");
  const std::string kind = string_at(j["kind"], "driver.kind");
  DriverSpec d;
  if (kind == "iid") {
    check_keys(j, "driver", {"kind", "probabilities"});
    d.kind = DriverKind::IID;
    d.probabilities = reals_at(j["probabilities"], "driver.probabilities");
  } else if (kind == "markov") {
    check_keys(j, "driver", {"kind", "transition"}, {"stationary"});
    d.kind = DriverKind::MarkovShift;
    const json& p = j["transition"];
    if (!p.is_array() || p.empty()) fail("driver.transition", "expected a square array");
    const auto n = static_cast<Eigen::Index>(p.size());
    d.transition.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::string w = "driver.transition[" + std::to_string(r) + "]";
      const std::vector<double> row = reals_at(p[static_cast<std::size_t>(r)], w);
      if (static_cast<Eigen::Index>(row.size()) != n) fail(w, "transition matrix is not square");
      for (Eigen::Index c = 0; c < n; ++c) d.transition(r, c) = row[static_cast<std::size_t>(c)];
    }
    if (j.contains("stationary")) d.stationary = reals_at(j["stationary"], "driver.stationary");
  } else if (kind == "rotation") {
    check_keys(j, "driver", {"kind", "alpha", "breakpoints"});
    d.kind = DriverKind::IrrationalRotation;
    d.alpha = real_at(j["alpha"], "driver.alpha");
    d.breakpoints = reals_at(j["breakpoints"], "driver.breakpoints");
  } else {
    fail("driver.kind", "expected \"iid\", \"markov\" or \"rotation\", got \"" + kind + "\"");
  }
  return d;
}

RepresentationSpec parse_representation(const json& j, const GroupModel& model) {
  RepresentationSpec r;
  if (!j.is_object()) fail("representation", "expected an object");
  if (!j.contains("family")) {
    check_keys(j, "representation", {"matrices"});
    r.matrices = matrices_at(j["matrices"], "representation.matrices", model);
    return r;
  }
  r.family = string_at(j["family"], "representation.family");
  if (r.family == "sl2_shear") {
    check_keys(j, "representation", {"family", "theta"});
    if (!(model == GroupModel::special_linear(2))) fail("representation", "family sl2_shear needs group SL(2)");
  } else if (r.family == "conjugated" || r.family == "constant") {
    check_keys(j, "representation", {"family", "theta", "matrices"});
    r.matrices = matrices_at(j["matrices"], "representation.matrices", model);
  } else {
    fail("representation.family", "unknown family \"" + r.family + "\"");
  }
  r.theta = real_at(j["theta"], "representation.theta");
  return r;
}

std::vector<TransformSpec> parse_transforms(const json& j, const GroupModel& model) {
  if (!j.is_array()) fail("transforms", "expected an array");
  std::vector<TransformSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "transforms[" + std::to_string(i) + "]";
    const json& t = j[i];
    if (!t.is_object() || !t.contains("op")) fail(where, "missing key 'op'");
    const std::string op = string_at(t["op"], where + ".op");
    TransformSpec s;
    if (op == "induce") {
      check_keys(t, where, {"op", "cylinders"});
      s.op = TransformSpec::Op::Induce;
      const json& cyl = t["cylinders"];
      if (!cyl.is_array() || cyl.empty()) fail(where + ".cylinders", "expected a non-empty array");
      for (std::size_t c = 0; c < cyl.size(); ++c) {
        const std::string w = where + ".cylinders[" + std::to_string(c) + "]";
        if (!cyl[c].is_array()) fail(w, "expected an array of symbols");
        std::vector<std::size_t> pattern;
        for (std::size_t k = 0; k < cyl[c].size(); ++k) {
          pattern.push_back(static_cast<std::size_t>(int_at(cyl[c][k], w + "[" + std::to_string(k) + "]", 0)));
        }
        if (pattern.size() > static_cast<std::size_t>(kMaxCylinderDepth)) fail(w, "cylinder depth exceeds 8");
        s.cylinders.push_back(std::move(pattern));
      }
    } else if (op == "conjugate") {
      check_keys(t, where, {"op", "table"});
      s.op = TransformSpec::Op::Conjugate;
      s.table = matrices_at(t["table"], where + ".table", model);
    } else if (op == "suspend") {
      check_keys(t, where, {"op", "roof", "delta"});
      s.op = TransformSpec::Op::Suspend;
      s.roof = reals_at(t["roof"], where + ".roof");
      s.delta = real_at(t["delta"], where + ".delta");
    } else if (op == "discretize") {
      check_keys(t, where, {"op", "t"});
      s.op = TransformSpec::Op::Discretize;
      s.t = real_at(t["t"], where + ".t");
      if (!(s.t > 0.0)) fail(where + ".t", "must be positive");
    } else if (op == "cross_section") {
      check_keys(t, where, {"op"});
      s.op = TransformSpec::Op::CrossSection;
    } else {
      fail(where + ".op", "unknown transform \"" + op + "\"");
    }
    out.push_back(std::move(s));
  }

  // Suspensions are flows, not cocycles: each must be read off immediately.
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::string where = "transforms[" + std::to_string(i) + "]";
    const bool flow_reader =
        out[i].op == TransformSpec::Op::Discretize || out[i].op == TransformSpec::Op::CrossSection;
    const bool after_suspend = i > 0 && out[i - 1].op == TransformSpec::Op::Suspend;
    if (flow_reader && !after_suspend) fail(where, "discretize and cross_section only apply to a suspension");
    if (out[i].op == TransformSpec::Op::Suspend &&
        (i + 1 == out.size() ||
         (out[i + 1].op != TransformSpec::Op::Discretize && out[i + 1].op != TransformSpec::Op::CrossSection))) {
      fail(where, "a suspension must be followed by discretize or cross_section");
    }
  }
  return out;
}

EstimatorConfig parse_estimator(const json& j) {
  check_keys(j, "estimator", {},
             {"n_steps", "n_trajectories", "burn_in", "renorm_interval", "flag_burn_in", "checkpoint_every",
              "threads"});
  EstimatorConfig cfg;
  if (j.contains("n_steps")) cfg.n_steps = int_at(j["n_steps"], "estimator.n_steps", 1);
  if (j.contains("n_trajectories")) cfg.n_trajectories = int_at(j["n_trajectories"], "estimator.n_trajectories", 1);
  if (j.contains("burn_in")) cfg.burn_in = int_at(j["burn_in"], "estimator.burn_in", 0);
  if (j.contains("renorm_interval")) cfg.renorm_interval = int_at(j["renorm_interval"], "estimator.renorm_interval", 1);
  if (j.contains("flag_burn_in")) cfg.flag_burn_in = int_at(j["flag_burn_in"], "estimator.flag_burn_in", 1);
  if (j.contains("checkpoint_every")) {
    cfg.checkpoint_every = int_at(j["checkpoint_every"], "estimator.checkpoint_every", 0);
  }
  if (j.contains("threads")) cfg.threads = static_cast<int>(int_at(j["threads"], "estimator.threads", 1));
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    fail("estimator", e.what());
  }
  return cfg;
}

std::vector<GroupElement> elements(const GroupModel& model, const std::vector<Mat>& matrices) {
  std::vector<GroupElement> out;
  for (const Mat& m : matrices) out.push_back(GroupElement::make(model, m));
  return out;
}

Mat family_conjugator(const GroupModel& model, double theta) {
  Mat u = Mat::Identity(model.dim, model.dim);
  if (model.kind == GroupKind::SpecialLinear) {
    u(0, 1) = theta;
  } else {
    u(0, model.dim / 2) = theta;
  }
  return u;
}

std::shared_ptr<const GregDriver> make_driver(const ScenarioSpec& spec, const Representation& rep) {
  const DriverSpec& d = spec.driver;
  try {
    switch (d.kind) {
      case DriverKind::IID:
        return std::make_shared<const GregDriver>(GregDriver::iid(rep, d.probabilities, spec.seed));
      case DriverKind::MarkovShift:
        return std::make_shared<const GregDriver>(GregDriver::markov(rep, d.transition, d.stationary, spec.seed));
      case DriverKind::IrrationalRotation:
        return std::make_shared<const GregDriver>(GregDriver::rotation(rep, d.alpha, d.breakpoints, spec.seed));
    }
  } catch (const InvalidArgument& e) {
    fail("driver", e.what());
  }
  fail("driver", "unknown kind");
}

// Structural checks only; no sampling.
void validate_spec(const ScenarioSpec& spec) {
  const Representation rep = build_representation(spec);
  const std::size_t n = make_driver(spec, rep)->n_symbols();
  for (std::size_t i = 0; i < spec.transforms.size(); ++i) {
    const TransformSpec& t = spec.transforms[i];
    const std::string where = "transforms[" + std::to_string(i) + "]";
    if (t.op == TransformSpec::Op::Induce) {
      for (const auto& pattern : t.cylinders) {
        for (const std::size_t sym : pattern) {
          if (sym >= n) fail(where, "cylinder symbol " + std::to_string(sym) + " is not a driver symbol");
        }
      }
    } else if (t.op == TransformSpec::Op::Conjugate) {
      if (t.table.size() != n) fail(where, "conjugator table needs one entry per driver symbol");
    } else if (t.op == TransformSpec::Op::Suspend) {
      if (t.roof.size() != n) fail(where, "roof needs one value per driver symbol");
      if (!(t.delta > 0.0)) fail(where, "delta must be positive");
      for (const double r : t.roof) {
        if (r < 2.0 * t.delta) fail(where, "roof values must be at least 2 * delta");
      }
    }
  }
}

}  // namespace

double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_decimal(text, text);
  const double num = parse_decimal(text.substr(0, slash), text);
  const double den = parse_decimal(text.substr(slash + 1), text);
  if (den == 0.0) throw ConfigError("'" + text + "' divides by zero");
  return num / den;
}

ScenarioSpec parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"name", "group", "driver", "representation"},
             {"seed", "transforms", "estimators", "estimator", "output"});
  ScenarioSpec s;
  s.digest = config_digest(json_text);
  s.name = string_at(j["name"], "name");
  if (j.contains("seed")) s.seed = static_cast<std::uint64_t>(int_at(j["seed"], "seed", 0));
  s.model = parse_group(j["group"]);
  s.driver = parse_driver(j["driver"]);
  s.representation = parse_representation(j["representation"], s.model);
  if (j.contains("transforms")) s.transforms = parse_transforms(j["transforms"], s.model);
  if (j.contains("estimators")) {
    const json& e = j["estimators"];
    if (!e.is_array() || e.empty()) fail("estimators", "expected a non-empty array of names");
    s.estimators.clear();
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string w = "estimators[" + std::to_string(i) + "]";
      try {
        s.estimators.push_back(parse_method(string_at(e[i], w)));
      } catch (const InvalidArgument& ex) {
        fail(w, ex.what());
      }
    }
  }
  if (j.contains("estimator")) s.estimator = parse_estimator(j["estimator"]);
  s.estimator.seed = s.seed;
  if (j.contains("output")) {
    check_keys(j["output"], "output", {}, {"record", "curve"});
    if (j["output"].contains("record")) s.record_path = string_at(j["output"]["record"], "output.record");
    if (j["output"].contains("curve")) s.curve_path = string_at(j["output"]["curve"], "output.curve");
  }

  validate_spec(s);
  return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<std::string> family_names() { return {"sl2_shear", "conjugated", "constant"}; }

Representation build_representation(const ScenarioSpec& spec, double theta) {
  const RepresentationSpec& r = spec.representation;
  const GroupModel& model = spec.model;
  try {
    if (!r.parametric() || r.family == "constant") return {model, elements(model, r.matrices)};
    if (r.family == "sl2_shear") {
      Mat g1(2, 2), g2(2, 2);
      g1 << 1, 1 + theta, 0, 1;
      g2 << 1, 0, 1, 1;
      return {model, elements(model, {g1, g2})};
    }
    const GroupElement u = GroupElement::make(model, family_conjugator(model, theta));
    const GroupElement u_inv = u.inverse();
    Representation out{model, {}};
    for (const GroupElement& g : elements(model, r.matrices)) out.table.push_back(u * g * u_inv);
    return out;
  } catch (const Error& e) {
    fail("representation", e.what());
  }
}

Representation build_representation(const ScenarioSpec& spec) {
  return build_representation(spec, spec.representation.theta);
}

BuiltSource build_source(const ScenarioSpec& spec, double theta, const EstimatorConfig& cfg) {
  const Representation rep = build_representation(spec, theta);
  BuiltSource out;
  const auto driver = make_driver(spec, rep);
  out.source = std::make_shared<CocycleSource>(driver, rep);

  for (std::size_t i = 0; i < spec.transforms.size(); ++i) {
    const TransformSpec& t = spec.transforms[i];
    const std::string where = "transforms[" + std::to_string(i) + "]";
    try {
      switch (t.op) {
        case TransformSpec::Op::Induce: {
          std::vector<Cylinder> cylinders;
          for (const auto& p : t.cylinders) cylinders.push_back(Cylinder{p});
          Membership membership(std::move(cylinders));
          out.diagnostics["set_measure"] = estimate_set_measure(*out.source, membership, cfg).mean;
          out.source = induce(out.source, std::move(membership), cfg);
          break;
        }
        case TransformSpec::Op::Conjugate:
          if (t.table.size() != rep.size()) fail(where, "conjugator table needs one entry per driver symbol");
          out.source = conjugate(out.source, elements(spec.model, t.table));
          break;
        case TransformSpec::Op::Suspend: {
          const Suspension susp{out.source, t.roof, t.delta};
          susp.validate();
          const TransformSpec& reader = spec.transforms.at(++i);
          if (reader.op == TransformSpec::Op::Discretize) {
            out.source = discretize_flow(susp, reader.t);
          } else {
            const CrossSection cs = cross_section_greg(susp, cfg);
            out.diagnostics["roof_integral"] = cs.roof_integral.mean;
            out.diagnostics["roof_integral_stderr"] = cs.roof_integral.stderr_;
            out.source = cs.greg;
          }
          break;
        }
        case TransformSpec::Op::Discretize:
        case TransformSpec::Op::CrossSection:
          fail(where, "discretize and cross_section only apply to a suspension");
      }
    } catch (const InvalidArgument& e) {
      fail(where, e.what());
    } catch (const NonReturningSet& e) {
      fail(where, e.what());
    }
  }
  return out;
}

}  // namespace lyaplab
