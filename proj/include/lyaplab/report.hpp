#pragma once

// Run records (JSON) and convergence curves (CSV).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyaplab/engine.hpp"

namespace lyaplab {

inline constexpr int kRunRecordSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

enum class PropertyStatus { Pass, Fail, Inconclusive };

const char* to_string(PropertyStatus status);
PropertyStatus parse_property_status(const std::string& text);

struct PropertyResult {
  std::string name;
  PropertyStatus status = PropertyStatus::Inconclusive;
  double measured = 0.0;
  double required = 0.0;
  // How measured is compared to required: "<=", ">=", "==" or "in".
  std::string comparator;
  std::string detail;

  friend bool operator==(const PropertyResult&, const PropertyResult&) = default;
};

struct ScenarioResult {
  std::string name;
  std::optional<double> theta;
  std::vector<SpectrumEstimate> estimates;
  std::map<std::string, double> diagnostics;
};

struct RunRecord {
  int schema_version = kRunRecordSchemaVersion;
  std::string tool_version = kToolVersion;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<ScenarioResult> scenarios;
  std::vector<PropertyResult> properties;
  std::map<std::string, double> diagnostics;
  // Only filled on request; everything else is reproducible bit for bit.
  std::optional<double> wall_clock_seconds;
};

bool operator==(const CartanVector& a, const CartanVector& b);
bool operator==(const CurvePoint& a, const CurvePoint& b);
bool operator==(const SpectrumEstimate& a, const SpectrumEstimate& b);
bool operator==(const ScenarioResult& a, const ScenarioResult& b);
bool operator==(const RunRecord& a, const RunRecord& b);

std::string run_to_json(const RunRecord& record);
// Throws SchemaError on version mismatch, unknown or missing fields.
RunRecord run_from_json(const std::string& text);

void write_run(const RunRecord& record, const std::filesystem::path& path);
RunRecord read_run(const std::filesystem::path& path);

// Header n,lambda_1..lambda_d,stderr_1..stderr_d; one row per checkpoint.
std::string convergence_csv_text(const SpectrumEstimate& est);
void convergence_csv(const SpectrumEstimate& est, const std::filesystem::path& path);

// SHA-256 hex of the key-sorted, whitespace-free serialization.
std::string config_digest(const std::string& config_json);

}  // namespace lyaplab
