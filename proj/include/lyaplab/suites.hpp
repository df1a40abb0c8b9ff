#pragma once

// Property suites behind `lyaplab check`. Each property reports a measured
// value against a required bound; statistical bounds are 3 combined
// standard errors unless stated otherwise.

#include <cstdint>
#include <string>
#include <vector>

#include "lyaplab/report.hpp"

namespace lyaplab {

struct SuiteOptions {
  std::uint64_t seed = 7;
  int threads = 1;
};

// Cocycle identity, kappa subadditivity, Kostant membership, wedge sums and
// inverse symmetry over >= 10^4 random inputs with d in {2, 3, 4}.
std::vector<PropertyResult> liealg_identities(const SuiteOptions& opts);
// Diagonal i.i.d. pair against its exact exponent; block SVD against QR.
std::vector<PropertyResult> diagonal_exactness(const SuiteOptions& opts);
// Kingman/QR against the Iwasawa formula, plus simplicity, on SL2 and SL3.
std::vector<PropertyResult> estimator_agreement(const SuiteOptions& opts);
// Kac, induction scaling, conjugation, time-t linearity, flow/section.
std::vector<PropertyResult> transform_laws(const SuiteOptions& opts);
// Zero drift for a compact rotation cocycle, positive drift for SL2.
std::vector<PropertyResult> drift_dichotomy(const SuiteOptions& opts);
// Refinement ratio on the shear family; invariance under conjugation.
std::vector<PropertyResult> continuity(const SuiteOptions& opts);

// liealg-identities, estimator-agreement, transform-laws, drift, continuity.
std::vector<std::string> suite_names();
// Throws ConfigError for an unknown name; "all" runs every suite in order.
std::vector<PropertyResult> run_suite(const std::string& name, const SuiteOptions& opts);

bool all_pass(const std::vector<PropertyResult>& results);
// Fixed-width table, one row per property.
std::string format_table(const std::vector<PropertyResult>& results);

}  // namespace lyaplab
