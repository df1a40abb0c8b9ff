#include "lyaplab/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lyaplab {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const char* where, std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw SchemaError(std::string(where) + ": expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) throw SchemaError(std::string(where) + ": missing field '" + k + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw SchemaError(std::string(where) + ": unknown field '" + item.key() + "' (schema version " +
                        std::to_string(kRunRecordSchemaVersion) + ")");
    }
  }
}

double number(const json& j, const char* where) {
  if (!j.is_number()) throw SchemaError(std::string(where) + ": expected a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const char* where) {
  if (!j.is_number_integer()) throw SchemaError(std::string(where) + ": expected an integer");
  return j.get<std::int64_t>();
}

std::string text(const json& j, const char* where) {
  if (!j.is_string()) throw SchemaError(std::string(where) + ": expected a string");
  return j.get<std::string>();
}

json vec_json(const CartanVector& v) { return v.to_vector(); }
json vec_json(const std::vector<double>& v) { return v; }

std::vector<double> doubles(const json& j, const char* where) {
  if (!j.is_array()) throw SchemaError(std::string(where) + ": expected an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, where));
  return out;
}

CartanVector cartan(const json& j, const char* where) { return CartanVector::from(doubles(j, where)); }

json estimate_json(const SpectrumEstimate& e) {
  json curve = json::array();
  for (const auto& p : e.convergence_curve) {
    curve.push_back({{"n", p.n}, {"lambda", vec_json(p.lambda)}, {"stderr", vec_json(p.stderr_)}});
  }
  json per = json::array();
  for (const auto& v : e.per_trajectory) per.push_back(vec_json(v));
  return {{"method", to_string(e.method)},
          {"lambda", vec_json(e.lambda)},
          {"stderr", vec_json(e.stderr_)},
          {"per_trajectory", per},
          {"convergence_curve", curve},
          {"n_steps", e.n_steps},
          {"n_trajectories", e.n_trajectories},
          {"burn_in", e.burn_in},
          {"reordered", e.reordered}};
}

SpectrumEstimate estimate_from(const json& j) {
  expect_keys(j, "estimate",
              {"method", "lambda", "stderr", "per_trajectory", "convergence_curve", "n_steps", "n_trajectories",
               "burn_in", "reordered"});
  SpectrumEstimate e;
  try {
    e.method = parse_method(text(j["method"], "estimate.method"));
  } catch (const InvalidArgument& err) {
    throw SchemaError(err.what());
  }
  e.lambda = cartan(j["lambda"], "estimate.lambda");
  e.stderr_ = doubles(j["stderr"], "estimate.stderr");
  if (!j["per_trajectory"].is_array()) throw SchemaError("estimate.per_trajectory: expected an array");
  for (const auto& v : j["per_trajectory"]) e.per_trajectory.push_back(cartan(v, "estimate.per_trajectory"));
  if (!j["convergence_curve"].is_array()) throw SchemaError("estimate.convergence_curve: expected an array");
  for (const auto& p : j["convergence_curve"]) {
    expect_keys(p, "curve point", {"n", "lambda", "stderr"});
    e.convergence_curve.push_back(
        {integer(p["n"], "curve.n"), cartan(p["lambda"], "curve.lambda"), doubles(p["stderr"], "curve.stderr")});
  }
  e.n_steps = integer(j["n_steps"], "estimate.n_steps");
  e.n_trajectories = integer(j["n_trajectories"], "estimate.n_trajectories");
  e.burn_in = integer(j["burn_in"], "estimate.burn_in");
  if (!j["reordered"].is_boolean()) throw SchemaError("estimate.reordered: expected a boolean");
  e.reordered = j["reordered"].get<bool>();
  return e;
}

json diagnostics_json(const std::map<std::string, double>& d) {
  json out = json::object();
  for (const auto& [k, v] : d) out[k] = v;
  return out;
}

std::map<std::string, double> diagnostics_from(const json& j, const char* where) {
  if (!j.is_object()) throw SchemaError(std::string(where) + ": expected an object");
  std::map<std::string, double> out;
  for (const auto& item : j.items()) out[item.key()] = number(item.value(), where);
  return out;
}

}  // namespace

const char* to_string(PropertyStatus status) {
  switch (status) {
    case PropertyStatus::Pass:
      return "pass";
    case PropertyStatus::Fail:
      return "fail";
    case PropertyStatus::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

PropertyStatus parse_property_status(const std::string& s) {
  if (s == "pass") return PropertyStatus::Pass;
  if (s == "fail") return PropertyStatus::Fail;
  if (s == "inconclusive") return PropertyStatus::Inconclusive;
  throw SchemaError("unknown property status '" + s + "'");
}

bool operator==(const CartanVector& a, const CartanVector& b) {
  return a.size() == b.size() && std::equal(a.coords.data(), a.coords.data() + a.size(), b.coords.data());
}

bool operator==(const CurvePoint& a, const CurvePoint& b) {
  return a.n == b.n && a.lambda == b.lambda && a.stderr_ == b.stderr_;
}

bool operator==(const SpectrumEstimate& a, const SpectrumEstimate& b) {
  return a.method == b.method && a.lambda == b.lambda && a.per_trajectory == b.per_trajectory &&
         a.stderr_ == b.stderr_ && a.convergence_curve == b.convergence_curve && a.n_steps == b.n_steps &&
         a.n_trajectories == b.n_trajectories && a.burn_in == b.burn_in && a.reordered == b.reordered;
}

bool operator==(const ScenarioResult& a, const ScenarioResult& b) {
  return a.name == b.name && a.theta == b.theta && a.estimates == b.estimates && a.diagnostics == b.diagnostics;
}

bool operator==(const RunRecord& a, const RunRecord& b) {
  return a.schema_version == b.schema_version && a.tool_version == b.tool_version &&
         a.config_digest == b.config_digest && a.seed == b.seed && a.scenarios == b.scenarios &&
         a.properties == b.properties && a.diagnostics == b.diagnostics &&
         a.wall_clock_seconds == b.wall_clock_seconds;
}

namespace {

// Same layout as dump(2), but floats carry 17 significant digits.
void write_json(const json& j, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * depth + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        write_json(it.value(), depth + 1, out);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ",\n";
        out += pad;
        write_json(j[i], depth + 1, out);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string text(buf);
      if (text.find_first_of(".e") == std::string::npos) text += ".0";
      out += text;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string run_to_json(const RunRecord& record) {
  json scenarios = json::array();
  for (const auto& s : record.scenarios) {
    json estimates = json::array();
    for (const auto& e : s.estimates) estimates.push_back(estimate_json(e));
    json entry = {{"name", s.name}, {"estimates", estimates}, {"diagnostics", diagnostics_json(s.diagnostics)}};
    if (s.theta) entry["theta"] = *s.theta;
    scenarios.push_back(std::move(entry));
  }
  json properties = json::array();
  for (const auto& p : record.properties) {
    properties.push_back({{"name", p.name},
                          {"status", to_string(p.status)},
                          {"measured", p.measured},
                          {"required", p.required},
                          {"comparator", p.comparator},
                          {"detail", p.detail}});
  }
  json out = {{"schema_version", record.schema_version},
              {"tool_version", record.tool_version},
              {"config_digest", record.config_digest},
              {"seed", record.seed},
              {"scenarios", scenarios},
              {"properties", properties},
              {"diagnostics", diagnostics_json(record.diagnostics)}};
  if (record.wall_clock_seconds) out["wall_clock_seconds"] = *record.wall_clock_seconds;
  std::string text;
  write_json(out, 0, text);
  return text + "\n";
}

RunRecord run_from_json(const std::string& input) {
  json j;
  try {
    j = json::parse(input);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("run record is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version")) throw SchemaError("run record has no schema_version");
  const std::int64_t version = integer(j["schema_version"], "schema_version");
  if (version != kRunRecordSchemaVersion) {
    throw SchemaError("run record schema version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kRunRecordSchemaVersion) + ")");
  }
  expect_keys(j, "run record",
              {"schema_version", "tool_version", "config_digest", "seed", "scenarios", "properties", "diagnostics"},
              {"wall_clock_seconds"});

  RunRecord r;
  r.schema_version = static_cast<int>(version);
  r.tool_version = text(j["tool_version"], "tool_version");
  r.config_digest = text(j["config_digest"], "config_digest");
  if (!j["seed"].is_number_unsigned()) throw SchemaError("seed: expected an unsigned integer");
  r.seed = j["seed"].get<std::uint64_t>();
  if (!j["scenarios"].is_array()) throw SchemaError("scenarios: expected an array");
  for (const auto& s : j["scenarios"]) {
    expect_keys(s, "scenario", {"name", "estimates", "diagnostics"}, {"theta"});
    ScenarioResult sr;
    sr.name = text(s["name"], "scenario.name");
    if (s.contains("theta")) sr.theta = number(s["theta"], "scenario.theta");
    if (!s["estimates"].is_array()) throw SchemaError("scenario.estimates: expected an array");
    for (const auto& e : s["estimates"]) sr.estimates.push_back(estimate_from(e));
    sr.diagnostics = diagnostics_from(s["diagnostics"], "scenario.diagnostics");
    r.scenarios.push_back(std::move(sr));
  }
  if (!j["properties"].is_array()) throw SchemaError("properties: expected an array");
  for (const auto& p : j["properties"]) {
    expect_keys(p, "property", {"name", "status", "measured", "required", "comparator", "detail"});
    r.properties.push_back({text(p["name"], "property.name"), parse_property_status(text(p["status"], "status")),
                            number(p["measured"], "property.measured"), number(p["required"], "property.required"),
                            text(p["comparator"], "property.comparator"), text(p["detail"], "property.detail")});
  }
  r.diagnostics = diagnostics_from(j["diagnostics"], "diagnostics");
  if (j.contains("wall_clock_seconds")) r.wall_clock_seconds = number(j["wall_clock_seconds"], "wall_clock_seconds");
  return r;
}

void write_run(const RunRecord& record, const std::filesystem::path& path) {
  const std::string body = run_to_json(record);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << body;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

RunRecord read_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return run_from_json(buf.str());
}

std::string convergence_csv_text(const SpectrumEstimate& est) {
  if (est.convergence_curve.empty()) throw InvalidArgument("estimate has no convergence curve");
  const int d = est.lambda.size();
  std::ostringstream os;
  os << "n";
  for (int i = 1; i <= d; ++i) os << ",lambda_" << i;
  for (int i = 1; i <= d; ++i) os << ",stderr_" << i;
  os << "\n";
  char buf[40];
  for (const auto& p : est.convergence_curve) {
    os << p.n;
    for (int i = 0; i < d; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p.lambda[i]);
      os << "," << buf;
    }
    for (double s : p.stderr_) {
      std::snprintf(buf, sizeof buf, "%.17g", s);
      os << "," << buf;
    }
    os << "\n";
  }
  return os.str();
}

void convergence_csv(const SpectrumEstimate& est, const std::filesystem::path& path) {
  const std::string body = convergence_csv_text(est);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << body;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string config_digest(const std::string& config_json) {
  json j;
  try {
    j = json::parse(config_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  // nlohmann objects iterate in key order, so dump() is canonical.
  const std::string canonical = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

}  // namespace lyaplab
