#include "lyaplab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lyaplab/parallel.hpp"

namespace lyaplab {

namespace {

constexpr double kZeroGap = 1e-9;
constexpr double kDriftFloor = 1e-12;
constexpr int kGradedSweeps = 100;

struct TrajectoryResult {
  CartanVector final_value;
  std::vector<CartanVector> at_checkpoints;
  bool reordered = false;
};

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

Mat identity(int d) { return Mat::Identity(d, d); }

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stderr_of(std::span<const double> x, double mean) {
  if (x.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1)) / std::sqrt(static_cast<double>(x.size()));
}

NumericalFailure blow_up(std::uint64_t trajectory, std::int64_t step) {
  return NumericalFailure("non-finite or degenerate factorization on trajectory " + std::to_string(trajectory),
                          step);
}

// Common driver: per-trajectory accumulation of an a-valued Birkhoff sum.
// `advance` consumes one increment, adds its a-value into acc and returns
// false on numerical failure.
template <typename Prepare, typename Advance>
SpectrumEstimate birkhoff_estimate(EstimatorMethod method, const IncrementSource& source,
                                   const EstimatorConfig& cfg, Prepare prepare, Advance advance) {
  cfg.validate();
  const GroupModel model = source.model();
  const auto checkpoints = cfg.checkpoints();
  const std::int64_t window = cfg.window();

  auto run = [&](std::int64_t id) {
    const auto trajectory = static_cast<std::uint64_t>(id);
    auto stream = source.open(cfg.seed, trajectory);
    auto state = prepare(*stream, trajectory);
    Vec acc = Vec::Zero(model.dim);
    TrajectoryResult result;
    std::size_t next_cp = 0;
    for (std::int64_t m = 1; m <= window; ++m) {
      if (!advance(*stream, state, acc)) throw blow_up(trajectory, cfg.burn_in + m - 1);
      if (next_cp < checkpoints.size() && checkpoints[next_cp] == m) {
        result.at_checkpoints.push_back(chamber_normalize(model, CartanVector(acc / static_cast<double>(m))));
        ++next_cp;
      }
    }
    const CartanVector raw(acc / static_cast<double>(window));
    result.reordered = !raw.is_sorted_nonincreasing();
    result.final_value = chamber_normalize(model, raw);
    return result;
  };

  const auto results = parallel_map(cfg.n_trajectories, cfg.threads, run);

  SpectrumEstimate est;
  est.method = method;
  est.n_steps = cfg.n_steps;
  est.n_trajectories = cfg.n_trajectories;
  est.burn_in = cfg.burn_in;
  for (const auto& r : results) {
    est.per_trajectory.push_back(r.final_value);
    est.reordered = est.reordered || r.reordered;
  }
  summarize(est.per_trajectory, est.lambda, est.stderr_);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<CartanVector> column;
    column.reserve(results.size());
    for (const auto& r : results) column.push_back(r.at_checkpoints[c]);
    CurvePoint p;
    p.n = checkpoints[c];
    summarize(column, p.lambda, p.stderr_);
    est.convergence_curve.push_back(std::move(p));
  }
  return est;
}

// Discards the burn-in, pushing `frame` along so it ends near the
// attracting flag.
void warm_frame(IncrementStream& stream, Mat& frame, std::int64_t steps, std::uint64_t trajectory) {
  Vec scratch;
  for (std::int64_t t = 0; t < steps; ++t) {
    const Increment inc = stream.next();
    if (!iwasawa_step(inc.g, frame, scratch)) throw blow_up(trajectory, t);
  }
}

// Graded triangular running product R = diag(exp(log_scale)) * unit_upper.
struct GradedProduct {
  Mat frame;
  Vec log_scale;
  Mat unit_upper;
};

// R_new = R' D N = D (D^-1 R' D) N.
bool graded_update(GradedProduct& p, const Mat& r_prime) {
  const Eigen::Index d = r_prime.rows();
  Mat c = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double r = r_prime(i, j);
      if (r != 0.0) c(i, j) = r * std::exp(p.log_scale[j] - p.log_scale[i]);
    }
  }
  Mat t = c.triangularView<Eigen::Upper>() * p.unit_upper;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diag = t(i, i);
    if (!std::isfinite(diag) || !(diag > 0.0)) return false;
    p.log_scale[i] += std::log(diag);
    t.row(i) /= diag;
  }
  if (!t.allFinite()) return false;
  p.unit_upper = t.triangularView<Eigen::Upper>();
  return true;
}

}  // namespace

const char* to_string(EstimatorMethod method) {
  switch (method) {
    case EstimatorMethod::KingmanQR:
      return "kingman_qr";
    case EstimatorMethod::IwasawaFormula:
      return "iwasawa_formula";
    case EstimatorMethod::BlockSVD:
      return "block_svd";
  }
  return "?";
}

EstimatorMethod parse_method(const std::string& name) {
  if (name == "kingman_qr") return EstimatorMethod::KingmanQR;
  if (name == "iwasawa_formula") return EstimatorMethod::IwasawaFormula;
  if (name == "block_svd") return EstimatorMethod::BlockSVD;
  throw InvalidArgument("unknown estimator '" + name + "'");
}

void EstimatorConfig::validate() const {
  require(n_steps > 0, "n_steps must be positive");
  require(n_trajectories > 0, "n_trajectories must be positive");
  require(burn_in >= 0, "burn_in must be non-negative");
  require(burn_in < n_steps, "burn_in must be smaller than n_steps");
  require(renorm_interval > 0, "renorm_interval must be positive");
  require(flag_burn_in > 0, "flag_burn_in must be positive");
  require(checkpoint_every >= 0, "checkpoint_every must be non-negative");
  require(threads >= 1, "threads must be at least 1");
}

std::vector<std::int64_t> EstimatorConfig::checkpoints() const {
  const std::int64_t w = window();
  std::vector<std::int64_t> out;
  if (checkpoint_every > 0) {
    for (std::int64_t n = checkpoint_every; n < w; n += checkpoint_every) out.push_back(n);
  } else {
    for (std::int64_t n = 1000; n < w; n *= 2) out.push_back(n);
  }
  out.push_back(w);
  return out;
}

void summarize(const std::vector<CartanVector>& samples, CartanVector& mean, std::vector<double>& stderr_out) {
  if (samples.empty()) throw InvalidArgument("no samples to summarize");
  const int d = samples.front().size();
  mean = CartanVector::zero(d);
  stderr_out.assign(static_cast<std::size_t>(d), 0.0);
  std::vector<double> column(samples.size());
  for (int i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < samples.size(); ++k) column[k] = samples[k][i];
    mean[i] = mean_of(column);
    stderr_out[static_cast<std::size_t>(i)] = stderr_of(column, mean[i]);
  }
}

SpectrumEstimate estimate_kingman_qr(const IncrementSource& source, const EstimatorConfig& cfg) {
  const int d = source.model().dim;
  struct State {
    Mat frame;
    Vec log_diag;
  };
  auto prepare = [&](IncrementStream& stream, std::uint64_t trajectory) {
    State s{identity(d), Vec::Zero(d)};
    warm_frame(stream, s.frame, cfg.burn_in, trajectory);
    return s;
  };
  auto advance = [](IncrementStream& stream, State& s, Vec& acc) {
    const Increment inc = stream.next();
    if (!iwasawa_step(inc.g, s.frame, s.log_diag)) return false;
    acc += s.log_diag;
    return true;
  };
  return birkhoff_estimate(EstimatorMethod::KingmanQR, source, cfg, prepare, advance);
}

SpectrumEstimate estimate_iwasawa_formula(const IncrementSource& source, const EstimatorConfig& cfg) {
  const GroupModel model = source.model();
  auto prepare = [&](IncrementStream& stream, std::uint64_t trajectory) {
    const Flag reference = Flag::generic(model.dim);
    if (stream.reversible()) {
      for (std::int64_t t = 0; t < cfg.burn_in; ++t) stream.next();
      return track_forward_flag(stream, cfg.flag_burn_in, reference);
    }
    Mat frame = reference.frame();
    warm_frame(stream, frame, cfg.burn_in, trajectory);
    return canonical_flag(frame);
  };
  auto advance = [&](IncrementStream& stream, Flag& xi, Vec& acc) {
    const Increment inc = stream.next();
    try {
      IwasawaResult r = iwasawa_cocycle(GroupElement::unchecked(model, inc.g), xi);
      acc += r.sigma.coords;
      xi = std::move(r.xi);
    } catch (const DegenerateInput&) {
      return false;
    }
    return true;
  };
  return birkhoff_estimate(EstimatorMethod::IwasawaFormula, source, cfg, prepare, advance);
}

Vec graded_log_singular_values(const Vec& log_scale, const Mat& unit_upper) {
  const Eigen::Index d = log_scale.size();
  Vec ls = log_scale;
  Mat n = unit_upper;
  // (D N)^T = N^T D and QR(N^T D) = Q (R_A D): one transposed QR sweep maps
  // D N to D' N' with the same singular values; couplings across a gap
  // shrink like exp(-gap) per sweep.
  for (int sweep = 0; sweep < kGradedSweeps; ++sweep) {
    double coupling = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i + 1; j < d; ++j) coupling = std::max(coupling, std::abs(n(i, j)));
    }
    if (coupling < 1e-16) break;
    Eigen::HouseholderQR<Mat> qr(n.transpose());
    const Mat ra = qr.matrixQR().triangularView<Eigen::Upper>();
    Vec next_ls(d);
    Mat next_n = Mat::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) next_ls[i] = ls[i] + std::log(std::abs(ra(i, i)));
    // Row signs of R_A are dropped: they do not change singular values.
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i + 1; j < d; ++j) {
        if (ra(i, j) != 0.0) next_n(i, j) = ra(i, j) / ra(i, i) * std::exp(ls[j] - ls[i]);
      }
    }
    if (!next_n.allFinite()) break;
    ls = next_ls;
    n = next_n;
  }
  // Whatever coupling is left sits between comparable scales; resolve it
  // with a dense SVD on the rescaled matrix when that is representable.
  const double top = ls.maxCoeff();
  Vec out(d);
  if (top - ls.minCoeff() < 600.0) {
    Mat m = n;
    for (Eigen::Index i = 0; i < d; ++i) m.row(i) *= std::exp(ls[i] - top);
    Eigen::JacobiSVD<Mat> svd(m);
    for (Eigen::Index i = 0; i < d; ++i) out[i] = std::log(std::max(svd.singularValues()[i], kSingularFloor)) + top;
  } else {
    out = ls;
  }
  std::sort(out.data(), out.data() + d, std::greater<>());
  return out;
}

SpectrumEstimate estimate_block_svd(const IncrementSource& source, const EstimatorConfig& cfg) {
  cfg.validate();
  const GroupModel model = source.model();
  const int d = model.dim;
  const auto checkpoints = cfg.checkpoints();
  const std::int64_t window = cfg.window();

  auto run = [&](std::int64_t id) {
    const auto trajectory = static_cast<std::uint64_t>(id);
    auto stream = source.open(cfg.seed, trajectory);
    for (std::int64_t t = 0; t < cfg.burn_in; ++t) stream->next();

    GradedProduct p{identity(d), Vec::Zero(d), identity(d)};
    TrajectoryResult result;
    std::size_t next_cp = 0;
    for (std::int64_t m = 1; m <= window; ++m) {
      const Increment inc = stream->next();
      Eigen::HouseholderQR<Mat> qr(inc.g * p.frame);
      Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
      p.frame = qr.householderQ();
      for (int i = 0; i < d; ++i) {
        if (r(i, i) < 0.0) {
          p.frame.col(i) *= -1.0;
          r.row(i) *= -1.0;
        }
      }
      if (!graded_update(p, r)) throw blow_up(trajectory, cfg.burn_in + m - 1);
      if (next_cp < checkpoints.size() && checkpoints[next_cp] == m) {
        const Vec kappa = graded_log_singular_values(p.log_scale, p.unit_upper);
        result.at_checkpoints.push_back(chamber_normalize(model, CartanVector(kappa / static_cast<double>(m))));
        ++next_cp;
      }
    }
    result.final_value = result.at_checkpoints.back();
    return result;
  };

  const auto results = parallel_map(cfg.n_trajectories, cfg.threads, run);

  SpectrumEstimate est;
  est.method = EstimatorMethod::BlockSVD;
  est.n_steps = cfg.n_steps;
  est.n_trajectories = cfg.n_trajectories;
  est.burn_in = cfg.burn_in;
  for (const auto& r : results) est.per_trajectory.push_back(r.final_value);
  summarize(est.per_trajectory, est.lambda, est.stderr_);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<CartanVector> column;
    for (const auto& r : results) column.push_back(r.at_checkpoints[c]);
    CurvePoint pt;
    pt.n = checkpoints[c];
    summarize(column, pt.lambda, pt.stderr_);
    est.convergence_curve.push_back(std::move(pt));
  }
  return est;
}

SpectrumEstimate estimate(EstimatorMethod method, const IncrementSource& source, const EstimatorConfig& cfg) {
  switch (method) {
    case EstimatorMethod::KingmanQR:
      return estimate_kingman_qr(source, cfg);
    case EstimatorMethod::IwasawaFormula:
      return estimate_iwasawa_formula(source, cfg);
    case EstimatorMethod::BlockSVD:
      return estimate_block_svd(source, cfg);
  }
  throw InvalidArgument("unknown estimator");
}

SpectrumEstimate estimate_kingman_qr(std::shared_ptr<const GregDriver> driver, Representation rep,
                                     const EstimatorConfig& cfg) {
  return estimate_kingman_qr(CocycleSource(std::move(driver), std::move(rep)), cfg);
}

SpectrumEstimate estimate_iwasawa_formula(std::shared_ptr<const GregDriver> driver, Representation rep,
                                          const EstimatorConfig& cfg) {
  return estimate_iwasawa_formula(CocycleSource(std::move(driver), std::move(rep)), cfg);
}

SpectrumEstimate estimate_block_svd(std::shared_ptr<const GregDriver> driver, Representation rep,
                                    const EstimatorConfig& cfg) {
  return estimate_block_svd(CocycleSource(std::move(driver), std::move(rep)), cfg);
}

namespace {

Flag push_back_to_front(const std::vector<Mat>& newest_first, const Flag& reference) {
  Mat frame = reference.frame();
  Vec scratch;
  for (auto it = newest_first.rbegin(); it != newest_first.rend(); ++it) {
    if (!iwasawa_step(*it, frame, scratch)) {
      throw NumericalFailure("flag tracking degenerated", -static_cast<std::int64_t>(newest_first.rend() - it));
    }
  }
  return canonical_flag(frame);
}

}  // namespace

Flag track_forward_flag(const TrajectoryCursor& cursor, const Representation& rep, std::int64_t burn_in,
                        const Flag& reference) {
  require(burn_in >= 1, "flag tracking needs burn_in >= 1");
  require(reference.dim() == rep.model.dim, "reference flag dimension mismatch");
  TrajectoryCursor walker = cursor;
  std::vector<Mat> newest_first;
  newest_first.reserve(static_cast<std::size_t>(burn_in));
  for (std::int64_t i = 0; i < burn_in; ++i) newest_first.push_back(rep[walker.retreat()].matrix());
  return push_back_to_front(newest_first, reference);
}

Flag track_forward_flag(const TrajectoryCursor& cursor, const Representation& rep, std::int64_t burn_in) {
  return track_forward_flag(cursor, rep, burn_in, Flag::generic(rep.model.dim));
}

Flag track_forward_flag(const IncrementStream& stream, std::int64_t burn_in, const Flag& reference) {
  require(burn_in >= 1, "flag tracking needs burn_in >= 1");
  require(stream.reversible(), "flag tracking needs a reversible stream");
  auto walker = stream.clone();
  std::vector<Mat> newest_first;
  newest_first.reserve(static_cast<std::size_t>(burn_in));
  for (std::int64_t i = 0; i < burn_in; ++i) newest_first.push_back(walker->previous().g);
  return push_back_to_front(newest_first, reference);
}

const char* to_string(DriftVerdict verdict) {
  switch (verdict) {
    case DriftVerdict::Positive:
      return "positive";
    case DriftVerdict::Zero:
      return "zero";
    case DriftVerdict::Negative:
      return "negative";
    case DriftVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

KestenReport kesten_drift_check(std::span<const double> scalar_samples, const PartialSums& partial_sums,
                                std::int64_t horizon) {
  require(!scalar_samples.empty(), "drift check needs at least one sample");
  require(horizon >= 2, "drift check horizon must be at least 2");
  KestenReport rep;
  rep.mean = mean_of(scalar_samples);
  rep.stderr_ = stderr_of(scalar_samples, rep.mean);

  const std::vector<double> full = partial_sums(horizon);
  const std::vector<double> half = partial_sums(horizon / 2);
  require(!full.empty() && full.size() == half.size(), "partial sums must be non-empty and aligned");
  std::size_t up = 0;
  std::size_t down = 0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (full[i] > half[i] && half[i] > 0.0) ++up;
    if (full[i] < half[i] && half[i] < 0.0) ++down;
  }
  const auto n = static_cast<double>(full.size());
  const double band = std::max(3.0 * rep.stderr_, kDriftFloor);
  if (rep.mean > band) {
    rep.fraction_diverging = static_cast<double>(up) / n;
    rep.verdict = rep.fraction_diverging > 0.99 ? DriftVerdict::Positive : DriftVerdict::Inconclusive;
  } else if (rep.mean < -band) {
    rep.fraction_diverging = static_cast<double>(down) / n;
    rep.verdict = rep.fraction_diverging > 0.99 ? DriftVerdict::Negative : DriftVerdict::Inconclusive;
  } else {
    rep.fraction_diverging = static_cast<double>(std::max(up, down)) / n;
    rep.verdict = DriftVerdict::Zero;
  }
  return rep;
}

std::vector<double> DriftSeries::at(std::int64_t n) const {
  const auto it = std::find(checkpoints.begin(), checkpoints.end(), n);
  require(it != checkpoints.end(), "drift series has no checkpoint at the requested time");
  const auto c = static_cast<std::size_t>(it - checkpoints.begin());
  std::vector<double> out;
  out.reserve(sums.size());
  for (const auto& row : sums) out.push_back(row[c]);
  return out;
}

DriftSeries drift_series(const IncrementSource& source, const EstimatorConfig& cfg, int root_index) {
  cfg.validate();
  const GroupModel model = source.model();
  const RootSystemInfo rs = RootSystemInfo::for_model(model);
  require(root_index >= 0 && root_index < rs.simple_roots.rows(), "simple root index out of range");
  Vec root(model.dim);
  for (int i = 0; i < model.dim; ++i) root[i] = rs.simple_roots(root_index, i);

  const std::int64_t window = cfg.window();
  const std::vector<std::int64_t> base = cfg.checkpoints();
  std::set<std::int64_t> cps(base.begin(), base.end());
  if (window >= 2) cps.insert(window / 2);
  DriftSeries series;
  series.checkpoints.assign(cps.begin(), cps.end());

  auto run = [&](std::int64_t id) {
    const auto trajectory = static_cast<std::uint64_t>(id);
    auto stream = source.open(cfg.seed, trajectory);
    Mat frame = identity(model.dim);
    warm_frame(*stream, frame, cfg.burn_in, trajectory);
    Vec log_diag;
    double h = 0.0;
    std::vector<double> row;
    std::size_t next_cp = 0;
    for (std::int64_t m = 1; m <= window; ++m) {
      const Increment inc = stream->next();
      if (!iwasawa_step(inc.g, frame, log_diag)) throw blow_up(trajectory, cfg.burn_in + m - 1);
      h += root.dot(log_diag);
      if (next_cp < series.checkpoints.size() && series.checkpoints[next_cp] == m) {
        row.push_back(h);
        ++next_cp;
      }
    }
    return row;
  };
  series.sums = parallel_map(cfg.n_trajectories, cfg.threads, run);
  for (const auto& row : series.sums) series.rates.push_back(row.back() / static_cast<double>(window));
  return series;
}

KestenReport kesten_drift_check(const DriftSeries& series) {
  return kesten_drift_check(series.rates, [&](std::int64_t n) { return series.at(n); }, series.horizon());
}

const char* to_string(SimplicityVerdict verdict) {
  switch (verdict) {
    case SimplicityVerdict::Simple:
      return "simple";
    case SimplicityVerdict::NotSimple:
      return "not-simple";
    case SimplicityVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

SimplicityReport simplicity_report(const SpectrumEstimate& est, const RootSystemInfo& rs) {
  require(est.lambda.coords.allFinite(), "simplicity report of a non-finite estimate");
  SimplicityReport rep;
  rep.gaps = simple_root_gaps(est.lambda, rs);
  const std::size_t k = rep.gaps.size();
  rep.gap_stderr.assign(k, 0.0);
  if (!est.per_trajectory.empty()) {
    std::vector<std::vector<double>> per_gap(k);
    for (const auto& v : est.per_trajectory) {
      const auto g = simple_root_gaps(v, rs);
      for (std::size_t i = 0; i < k; ++i) per_gap[i].push_back(g[i]);
    }
    for (std::size_t i = 0; i < k; ++i) {
      rep.gap_stderr[i] = stderr_of(per_gap[i], mean_of(per_gap[i]));
    }
  }
  rep.min_gap = *std::min_element(rep.gaps.begin(), rep.gaps.end());

  const double zero = kZeroGap * std::max(1.0, est.lambda.coords.lpNorm<1>());
  bool all_resolved = true;
  bool some_zero = false;
  for (std::size_t i = 0; i < k; ++i) {
    if (rep.gaps[i] <= zero) some_zero = true;
    if (!(rep.gaps[i] > 3.0 * rep.gap_stderr[i]) || rep.gaps[i] <= zero) all_resolved = false;
  }
  if (all_resolved) {
    rep.verdict = SimplicityVerdict::Simple;
  } else if (some_zero) {
    rep.verdict = SimplicityVerdict::NotSimple;
  } else {
    rep.verdict = SimplicityVerdict::Inconclusive;
  }
  return rep;
}

namespace {

double max_coordinate_difference(const CartanVector& a, const CartanVector& b) {
  return (a.coords - b.coords).cwiseAbs().maxCoeff();
}

}  // namespace

SweepTable continuity_sweep(const SourceFamily& family, std::span<const double> thetas, const EstimatorConfig& cfg,
                            EstimatorMethod method) {
  require(!thetas.empty(), "continuity sweep needs at least one parameter value");
  SweepTable table;
  for (double theta : thetas) {
    const auto source = family(theta);
    table.rows.push_back({theta, estimate(method, *source, cfg)});
  }
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    table.successive_differences.push_back(
        max_coordinate_difference(table.rows[i + 1].estimate.lambda, table.rows[i].estimate.lambda));
  }
  if (thetas.size() >= 3) {
    const double h = thetas[1] - thetas[0];
    bool uniform = h != 0.0;
    for (std::size_t i = 1; i + 1 < thetas.size(); ++i) {
      if (std::abs((thetas[i + 1] - thetas[i]) - h) > 1e-9 * std::abs(h)) uniform = false;
    }
    if (uniform) {
      double fine = 0.0;
      double coarse = 0.0;
      for (double x : table.successive_differences) fine += x;
      fine /= static_cast<double>(table.successive_differences.size());
      for (std::size_t i = 0; i + 2 < table.rows.size(); ++i) {
        coarse += max_coordinate_difference(table.rows[i + 2].estimate.lambda, table.rows[i].estimate.lambda);
      }
      coarse /= static_cast<double>(table.rows.size() - 2);
      if (coarse > 0.0) table.refinement_ratio = fine / coarse;
    }
  }
  return table;
}

SweepTable continuity_sweep(std::shared_ptr<const GregDriver> driver, const RepresentationFamily& family,
                            std::span<const double> thetas, const EstimatorConfig& cfg, EstimatorMethod method) {
  SourceFamily sources = [&](double theta) -> std::shared_ptr<const IncrementSource> {
    return std::make_shared<CocycleSource>(driver, family(theta));
  };
  return continuity_sweep(sources, thetas, cfg, method);
}

}  // namespace lyaplab
