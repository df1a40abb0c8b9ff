#pragma once

// Lyapunov spectrum estimators and the diagnostics built on them.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lyaplab/drivers.hpp"
#include "lyaplab/liealg.hpp"
#include "lyaplab/stream.hpp"

namespace lyaplab {

enum class EstimatorMethod { KingmanQR, IwasawaFormula, BlockSVD };

const char* to_string(EstimatorMethod method);
EstimatorMethod parse_method(const std::string& name);

struct EstimatorConfig {
  std::int64_t n_steps = 100'000;
  std::int64_t n_trajectories = 64;
  std::int64_t burn_in = 1000;
  std::int64_t renorm_interval = 10'000;
  std::uint64_t seed = 0;
  std::int64_t flag_burn_in = 500;
  // 0: checkpoints at 1000 * 2^j; otherwise every multiple of this value.
  std::int64_t checkpoint_every = 0;
  int threads = 1;

  void validate() const;
  // Number of increments that enter the average.
  std::int64_t window() const { return n_steps - burn_in; }
  std::vector<std::int64_t> checkpoints() const;
};

struct CurvePoint {
  std::int64_t n = 0;
  CartanVector lambda;
  std::vector<double> stderr_;
};

struct SpectrumEstimate {
  EstimatorMethod method = EstimatorMethod::KingmanQR;
  CartanVector lambda;
  std::vector<CartanVector> per_trajectory;
  std::vector<double> stderr_;
  std::vector<CurvePoint> convergence_curve;
  std::int64_t n_steps = 0;
  std::int64_t n_trajectories = 0;
  std::int64_t burn_in = 0;
  // Some trajectory needed sorting after burn-in.
  bool reordered = false;
};

// Mean and standard error (sample sd / sqrt(n)) of per-trajectory vectors.
void summarize(const std::vector<CartanVector>& samples, CartanVector& mean, std::vector<double>& stderr_out);

SpectrumEstimate estimate_kingman_qr(const IncrementSource& source, const EstimatorConfig& cfg);
SpectrumEstimate estimate_iwasawa_formula(const IncrementSource& source, const EstimatorConfig& cfg);
SpectrumEstimate estimate_block_svd(const IncrementSource& source, const EstimatorConfig& cfg);
SpectrumEstimate estimate(EstimatorMethod method, const IncrementSource& source, const EstimatorConfig& cfg);

SpectrumEstimate estimate_kingman_qr(std::shared_ptr<const GregDriver> driver, Representation rep,
                                     const EstimatorConfig& cfg);
SpectrumEstimate estimate_iwasawa_formula(std::shared_ptr<const GregDriver> driver, Representation rep,
                                          const EstimatorConfig& cfg);
SpectrumEstimate estimate_block_svd(std::shared_ptr<const GregDriver> driver, Representation rep,
                                    const EstimatorConfig& cfg);

// Log singular values of diag(exp(log_scale)) * unit_upper, without
// forming the (possibly overflowing) product. Sorted non-increasing.
Vec graded_log_singular_values(const Vec& log_scale, const Mat& unit_upper);

// Pushes reference through F(T^-1 x) F(T^-2 x) ... F(T^-burn_in x); the
// result approximates the equivariant flag at x.
Flag track_forward_flag(const TrajectoryCursor& cursor, const Representation& rep, std::int64_t burn_in,
                        const Flag& reference);
Flag track_forward_flag(const TrajectoryCursor& cursor, const Representation& rep, std::int64_t burn_in);
// Same on any reversible stream; the stream is not moved.
Flag track_forward_flag(const IncrementStream& stream, std::int64_t burn_in, const Flag& reference);

enum class DriftVerdict { Positive, Zero, Negative, Inconclusive };
const char* to_string(DriftVerdict verdict);

struct KestenReport {
  double mean = 0.0;
  double stderr_ = 0.0;
  double fraction_diverging = 0.0;
  DriftVerdict verdict = DriftVerdict::Inconclusive;
};

// Partial sums h_n(x) over all trajectories at time n.
using PartialSums = std::function<std::vector<double>(std::int64_t n)>;

// scalar_samples: per-trajectory drift estimates h_N / N. partial_sums is
// queried at horizon and horizon / 2.
KestenReport kesten_drift_check(std::span<const double> scalar_samples, const PartialSums& partial_sums,
                                std::int64_t horizon);

// Birkhoff sums of a simple root applied to the Iwasawa increments
// sigma(F(T^n x), xi_n) along each trajectory, recorded at checkpoints.
struct DriftSeries {
  std::vector<std::int64_t> checkpoints;
  std::vector<std::vector<double>> sums;  // [trajectory][checkpoint]
  std::vector<double> rates;              // h_N / N per trajectory

  std::vector<double> at(std::int64_t n) const;
  std::int64_t horizon() const { return checkpoints.empty() ? 0 : checkpoints.back(); }
};

DriftSeries drift_series(const IncrementSource& source, const EstimatorConfig& cfg, int root_index);
KestenReport kesten_drift_check(const DriftSeries& series);

enum class SimplicityVerdict { Simple, NotSimple, Inconclusive };
const char* to_string(SimplicityVerdict verdict);

struct SimplicityReport {
  std::vector<double> gaps;
  std::vector<double> gap_stderr;
  double min_gap = 0.0;
  SimplicityVerdict verdict = SimplicityVerdict::Inconclusive;

  bool simple() const { return verdict == SimplicityVerdict::Simple; }
};

SimplicityReport simplicity_report(const SpectrumEstimate& est, const RootSystemInfo& rs);

using RepresentationFamily = std::function<Representation(double theta)>;
using SourceFamily = std::function<std::shared_ptr<const IncrementSource>(double theta)>;

struct SweepRow {
  double theta = 0.0;
  SpectrumEstimate estimate;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  // max_i |Lambda(theta_{k+1})_i - Lambda(theta_k)_i|
  std::vector<double> successive_differences;
  // Mean spacing-h difference over mean spacing-2h difference, when the
  // grid is uniform with at least three points; ~0.5 for Lipschitz families.
  std::optional<double> refinement_ratio;
};

SweepTable continuity_sweep(const SourceFamily& family, std::span<const double> thetas, const EstimatorConfig& cfg,
                            EstimatorMethod method = EstimatorMethod::KingmanQR);
SweepTable continuity_sweep(std::shared_ptr<const GregDriver> driver, const RepresentationFamily& family,
                            std::span<const double> thetas, const EstimatorConfig& cfg,
                            EstimatorMethod method = EstimatorMethod::KingmanQR);

}  // namespace lyaplab
