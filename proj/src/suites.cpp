#include "lyaplab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "lyaplab/errors.hpp"
#include "lyaplab/oracles.hpp"
#include "lyaplab/transforms.hpp"

namespace lyaplab {

namespace {

constexpr int kIdentityInputsPerDim = 3334;
constexpr std::int64_t kSteps = 100'000;
constexpr std::int64_t kTrajectories = 64;
constexpr double kZeroDriftFloor = 1e-12;

PropertyResult compare(std::string name, double measured, double required, const std::string& comparator,
                       std::string detail = {}) {
  bool ok = false;
  if (comparator == "<=") ok = measured <= required;
  if (comparator == ">=") ok = measured >= required;
  if (comparator == "==") ok = measured == required;
  return {std::move(name), ok ? PropertyStatus::Pass : PropertyStatus::Fail, measured, required, comparator,
          std::move(detail)};
}

// |diff| / se, finite even when se vanishes.
double z_score(double diff, double se) {
  if (diff == 0.0) return 0.0;
  return std::min(std::abs(diff) / std::max(se, 1e-300), 1e300);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

GroupElement element(const GroupModel& model, std::initializer_list<double> entries) {
  Mat m(model.dim, model.dim);
  auto it = entries.begin();
  for (int i = 0; i < model.dim; ++i) {
    for (int j = 0; j < model.dim; ++j) m(i, j) = *it++;
  }
  return GroupElement::make(model, m);
}

const GroupModel kSL2 = GroupModel::special_linear(2);
const GroupModel kSL3 = GroupModel::special_linear(3);

Representation diagonal_pair() {
  return {kSL2, {element(kSL2, {2, 0, 0, 0.5}), element(kSL2, {3, 0, 0, 1.0 / 3.0})}};
}

Representation unipotent_pair() { return {kSL2, {element(kSL2, {1, 1, 0, 1}), element(kSL2, {1, 0, 1, 1})}}; }

Representation sl3_pair() {
  return {kSL3, {element(kSL3, {2, 1, 0, 1, 1, 0, 0, 0, 1}), element(kSL3, {1, 0, 0, 0, 1, 1, 1, 1, 2})}};
}

Representation rotation_pair() {
  auto rot = [](double a) { return element(kSL2, {std::cos(a), -std::sin(a), std::sin(a), std::cos(a)}); };
  return {kSL2, {rot(1.0), rot(-0.3)}};
}

std::shared_ptr<const GregDriver> iid_driver(const Representation& rep, std::uint64_t seed) {
  std::vector<double> p(rep.size(), 1.0 / static_cast<double>(rep.size()));
  return std::make_shared<const GregDriver>(GregDriver::iid(rep, p, seed));
}

std::shared_ptr<const IncrementSource> iid_source(const Representation& rep, std::uint64_t seed) {
  return std::make_shared<CocycleSource>(iid_driver(rep, seed), rep);
}

std::shared_ptr<const IncrementSource> markov_source(const Representation& rep, std::uint64_t seed) {
  Eigen::MatrixXd p(2, 2);
  p << 0.3, 0.7, 0.7, 0.3;
  return std::make_shared<CocycleSource>(
      std::make_shared<const GregDriver>(GregDriver::markov(rep, p, {0.5, 0.5}, seed)), rep);
}

EstimatorConfig standard_config(const SuiteOptions& opts, std::int64_t n_steps = kSteps) {
  EstimatorConfig cfg;
  cfg.n_steps = n_steps;
  cfg.n_trajectories = kTrajectories;
  cfg.seed = opts.seed;
  cfg.threads = opts.threads;
  return cfg;
}

// Largest coordinatewise |a - b| in units of the combined standard error.
double agreement_z(const SpectrumEstimate& a, const SpectrumEstimate& b, double scale_b = 1.0) {
  double worst = 0.0;
  for (int i = 0; i < a.lambda.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double se = std::hypot(a.stderr_[k], scale_b * b.stderr_[k]);
    worst = std::max(worst, z_score(a.lambda[i] - scale_b * b.lambda[i], se));
  }
  return worst;
}

PropertyResult simplicity_property(const std::string& name, const SpectrumEstimate& est) {
  const SimplicityReport rep = simplicity_report(est, RootSystemInfo::for_model(
                                                          GroupModel::special_linear(est.lambda.size())));
  double worst = 1e300;
  for (std::size_t i = 0; i < rep.gaps.size(); ++i) worst = std::min(worst, z_score(rep.gaps[i], rep.gap_stderr[i]));
  PropertyResult r = compare(name, worst, 3.0, ">=", std::string("verdict ") + to_string(rep.verdict));
  r.status = rep.verdict == SimplicityVerdict::Simple      ? PropertyStatus::Pass
             : rep.verdict == SimplicityVerdict::NotSimple ? PropertyStatus::Fail
                                                           : PropertyStatus::Inconclusive;
  return r;
}

}  // namespace

std::vector<PropertyResult> liealg_identities(const SuiteOptions& opts) {
  oracles::Rng rng(opts.seed ^ 0x11a1e9ULL);
  double cocycle = 0.0;
  double wedge = 0.0;
  double inverse = 0.0;
  int subadditivity_violations = 0;
  int kostant_violations = 0;
  int inputs = 0;
  for (const int d : {2, 3, 4}) {
    for (int n = 0; n < kIdentityInputsPerDim; ++n, ++inputs) {
      const GroupElement g = oracles::random_sl(rng, d);
      const GroupElement h = oracles::random_sl(rng, d);
      const Flag xi = oracles::random_flag(rng, d);

      const IwasawaResult inner = iwasawa_cocycle(h, xi);
      const CartanVector lhs = iwasawa_cocycle(g * h, xi).sigma;
      const CartanVector rhs = iwasawa_cocycle(g, inner.xi).sigma + inner.sigma;
      cocycle = std::max(cocycle, (lhs - rhs).coords.norm() / (1.0 + length(g) + length(h)));

      if (!dominance_leq(cartan_projection(g * h), cartan_projection(g) + cartan_projection(h))) {
        ++subadditivity_violations;
      }
      if (!kostant_hull_check(oracles::random_cartan(rng, d, 2.0), xi, 16)) ++kostant_violations;

      const Eigen::MatrixXd dense = g.matrix();
      for (int k = 1; k < d; ++k) {
        wedge = std::max(wedge, std::abs(wedge_log_norm(g, k) - oracles::exterior_log_norm(dense, k)));
      }

      const CartanVector kg = cartan_projection(g);
      const CartanVector ki = cartan_projection(g.inverse());
      for (int i = 0; i < d; ++i) inverse = std::max(inverse, std::abs(ki[i] + kg[d - 1 - i]));
    }
  }
  const std::string over = std::to_string(inputs) + " random inputs, d in {2,3,4}";
  return {
      compare("iwasawa-cocycle-identity", cocycle, 1e-8, "<=", "max residual / (1 + |g| + |h|), " + over),
      compare("cartan-subadditivity", subadditivity_violations, 0, "==", "dominance violations, " + over),
      compare("kostant-hull-membership", kostant_violations, 0, "==", "hull violations, " + over),
      compare("wedge-partial-sums", wedge, 1e-8, "<=", "max |log|wedge^k g| - oracle|, " + over),
      compare("cartan-inverse-symmetry", inverse, 1e-8, "<=", "max |kappa(g^-1) + w0 kappa(g)|, " + over),
  };
}

std::vector<PropertyResult> diagonal_exactness(const SuiteOptions& opts) {
  const Representation rep = diagonal_pair();
  const auto driver = iid_driver(rep, opts.seed);
  const double exact = 0.5 * (std::log(2.0) + std::log(3.0));
  std::vector<PropertyResult> out;
  for (const EstimatorMethod m : {EstimatorMethod::KingmanQR, EstimatorMethod::IwasawaFormula}) {
    CocycleSource src(driver, rep);
    const SpectrumEstimate e = estimate(m, src, standard_config(opts));
    const double z = std::max(z_score(e.lambda[0] - exact, e.stderr_[0]), z_score(e.lambda[1] + exact, e.stderr_[1]));
    out.push_back(compare(std::string("diagonal-iid-exact.") + to_string(m), z, 3.0, "<=",
                          fmt("lambda_1 = %.10f, exact %.10f", e.lambda[0], exact)));
  }
  EstimatorConfig short_cfg = standard_config(opts, 10'000);
  short_cfg.n_trajectories = 16;
  CocycleSource src(driver, rep);
  const SpectrumEstimate qr = estimate_kingman_qr(src, short_cfg);
  const SpectrumEstimate svd = estimate_block_svd(src, short_cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < qr.per_trajectory.size(); ++k) {
    worst = std::max(worst, (qr.per_trajectory[k] - svd.per_trajectory[k]).coords.cwiseAbs().maxCoeff());
  }
  out.push_back(compare("block-svd-vs-qr.diagonal", worst, 1e-6, "<=", "same streams, n = 10^4"));
  return out;
}

std::vector<PropertyResult> estimator_agreement(const SuiteOptions& opts) {
  std::vector<PropertyResult> out;
  const std::pair<const char*, Representation> scenarios[] = {{"sl2-unipotent", unipotent_pair()},
                                                              {"sl3-generic", sl3_pair()}};
  for (const auto& [name, rep] : scenarios) {
    CocycleSource src(iid_driver(rep, opts.seed), rep);
    const EstimatorConfig cfg = standard_config(opts);
    const SpectrumEstimate qr = estimate_kingman_qr(src, cfg);
    const SpectrumEstimate iw = estimate_iwasawa_formula(src, cfg);
    out.push_back(compare(std::string("qr-vs-iwasawa.") + name, agreement_z(qr, iw), 3.0, "<=",
                          fmt("lambda_1 %.8f vs %.8f", qr.lambda[0], iw.lambda[0])));
    out.push_back(simplicity_property(std::string("simple.") + name + ".kingman_qr", qr));
    out.push_back(simplicity_property(std::string("simple.") + name + ".iwasawa_formula", iw));
  }
  return out;
}

std::vector<PropertyResult> transform_laws(const SuiteOptions& opts) {
  std::vector<PropertyResult> out;
  const EstimatorConfig cfg = standard_config(opts);
  const Representation rep = unipotent_pair();

  {
    const auto parent = iid_source(rep, opts.seed);
    const Membership set({Cylinder{{1}}});
    const MeanEstimate m = estimate_set_measure(*parent, set, cfg);
    const auto induced = induce(parent, set, cfg);
    const MeanEstimate ret = return_time_statistics(*induced, cfg);
    const double kac_se = std::hypot(ret.stderr_ * m.mean, m.stderr_ * ret.mean);
    out.push_back(compare("kac-identity", z_score(ret.mean * m.mean - 1.0, kac_se), 3.0, "<=",
                          fmt("mean return %.6f, measure %.6f", ret.mean, m.mean)));

    const SpectrumEstimate base = estimate_kingman_qr(*parent, cfg);
    const SpectrumEstimate ind = estimate_kingman_qr(*induced, cfg);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double se = std::hypot(std::hypot(ind.stderr_[k] * m.mean, ind.lambda[i] * m.stderr_), base.stderr_[k]);
      worst = std::max(worst, z_score(ind.lambda[i] * m.mean - base.lambda[i], se));
    }
    out.push_back(compare("induced-spectrum-scaling", worst, 3.0, "<=",
                          fmt("Lambda' m = %.6f, Lambda = %.6f", ind.lambda[0] * m.mean, base.lambda[0])));
  }

  const auto markov = markov_source(rep, opts.seed);
  {
    const auto conj = conjugate(markov, {element(kSL2, {1, 3, 0, 1}), element(kSL2, {2, 1, 1, 1})});
    const SpectrumEstimate f = estimate_kingman_qr(*markov, cfg);
    const SpectrumEstimate d = estimate_kingman_qr(*conj, cfg);
    out.push_back(compare("conjugation-invariance", agreement_z(d, f), 3.0, "<=",
                          fmt("Lambda_D %.6f, Lambda_F %.6f", d.lambda[0], f.lambda[0])));
  }

  {
    const Suspension susp{markov, {1.0, 2.0}, 0.5};
    const double ts[] = {0.5, 1.0, 2.0};
    std::vector<SpectrumEstimate> est;
    for (const double t : ts) est.push_back(estimate_kingman_qr(*discretize_flow(susp, t), cfg));
    double worst = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        for (int i = 0; i < 2; ++i) {
          const auto k = static_cast<std::size_t>(i);
          const double se = std::hypot(est[a].stderr_[k] / ts[a], est[b].stderr_[k] / ts[b]);
          worst = std::max(worst, z_score(est[a].lambda[i] / ts[a] - est[b].lambda[i] / ts[b], se));
        }
      }
    }
    out.push_back(compare("time-t-linearity", worst, 3.0, "<=",
                          fmt("Lambda_t / t at t = 0.5, 1, 2: %.6f %.6f %.6f", est[0].lambda[0] / 0.5,
                              est[1].lambda[0], est[2].lambda[0] / 2.0)));

    const CrossSection cs = cross_section_greg(susp, cfg);
    const SpectrumEstimate section = estimate_kingman_qr(*cs.greg, cfg);
    const SpectrumEstimate& flow = est[1];
    const double integral = cs.roof_integral.mean;
    double flow_z = 0.0;
    for (int i = 0; i < 2; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double se = std::hypot(section.stderr_[k],
                                   std::hypot(integral * flow.stderr_[k], flow.lambda[i] * cs.roof_integral.stderr_));
      flow_z = std::max(flow_z, z_score(section.lambda[i] - integral * flow.lambda[i], se));
    }
    out.push_back(compare("roof-integral", z_score(integral - 1.5, cs.roof_integral.stderr_), 3.0, "<=",
                          fmt("integral of r = %.6f, exact 1.5", integral)));
    out.push_back(compare("flow-section-scaling", flow_z, 3.0, "<=",
                          fmt("Lambda_F %.6f, (int r) Lambda_Y %.6f", section.lambda[0], integral * flow.lambda[0])));
  }

  {
    // Exact telescoping of conjugated products for n <= 50.
    const std::vector<GroupElement> s{element(kSL2, {1, 3, 0, 1}), element(kSL2, {2, 1, 1, 1})};
    const auto conj = conjugate(markov, s);
    double worst = 0.0;
    for (std::uint64_t traj = 0; traj < 16; ++traj) {
      auto base = markov->open(opts.seed, traj);
      auto stream = conj->open(opts.seed, traj);
      const Increment first = base->next();
      Mat fn = first.g;
      Mat dn = stream->next().g;
      for (int n = 1; n <= 50; ++n) {
        const Increment next = base->next();
        const Mat direct = s[next.symbol].matrix() * fn * s[first.symbol].inverse().matrix();
        worst = std::max(worst, (dn - direct).norm() / std::max(1.0, direct.norm()));
        fn = next.g * fn;
        dn = stream->next().g * dn;
      }
    }
    out.push_back(compare("conjugation-composition", worst, 1e-10, "<=", "relative error, n <= 50"));
  }
  return out;
}

std::vector<PropertyResult> drift_dichotomy(const SuiteOptions& opts) {
  std::vector<PropertyResult> out;
  const EstimatorConfig cfg = standard_config(opts);

  {
    const Representation rep = rotation_pair();
    const auto driver = std::make_shared<const GregDriver>(
        GregDriver::rotation(rep, (std::sqrt(5.0) - 1.0) / 2.0, {0.0, 0.4}, opts.seed));
    const CocycleSource src(driver, rep);
    const SpectrumEstimate e = estimate_kingman_qr(src, cfg);
    const double norm = e.lambda.coords.cwiseAbs().maxCoeff();
    const double band = std::max(3.0 * *std::max_element(e.stderr_.begin(), e.stderr_.end()), kZeroDriftFloor);
    out.push_back(compare("zero-drift.rotation", norm, band, "<=", "max |lambda_i| against max(3 stderr, 1e-12)"));

    const KestenReport k = kesten_drift_check(drift_series(src, cfg, 0));
    PropertyResult r = compare("kesten.rotation", std::abs(k.mean), std::max(3.0 * k.stderr_, kZeroDriftFloor), "<=",
                               std::string("verdict ") + to_string(k.verdict));
    r.status = k.verdict == DriftVerdict::Zero ? PropertyStatus::Pass : PropertyStatus::Fail;
    out.push_back(r);
  }

  {
    const Representation rep = unipotent_pair();
    const CocycleSource src(iid_driver(rep, opts.seed), rep);
    const SpectrumEstimate e = estimate_kingman_qr(src, cfg);
    out.push_back(compare("positive-drift.sl2-unipotent", z_score(e.lambda[0], e.stderr_[0]) *
                                                             (e.lambda[0] > 0 ? 1.0 : -1.0),
                          3.0, ">=", fmt("lambda_1 = %.8f", e.lambda[0])));

    const KestenReport k = kesten_drift_check(drift_series(src, cfg, 0));
    PropertyResult r = compare("kesten.sl2-unipotent", k.fraction_diverging, 0.99, ">=",
                               std::string("verdict ") + to_string(k.verdict));
    r.status = k.verdict == DriftVerdict::Positive ? PropertyStatus::Pass : PropertyStatus::Fail;
    out.push_back(r);
  }
  return out;
}

std::vector<PropertyResult> continuity(const SuiteOptions& opts) {
  std::vector<PropertyResult> out;
  const EstimatorConfig cfg = standard_config(opts);
  const auto driver = iid_driver(unipotent_pair(), opts.seed);

  const RepresentationFamily shear = [](double theta) {
    return Representation{kSL2, {element(kSL2, {1, 1 + theta, 0, 1}), element(kSL2, {1, 0, 1, 1})}};
  };
  const std::vector<double> grid{0.0, 0.01, 0.02, 0.03, 0.04};
  const SweepTable table = continuity_sweep(driver, shear, grid, cfg);
  const double ratio = table.refinement_ratio.value_or(0.0);
  out.push_back(compare("refinement-ratio.sl2-shear", std::abs(ratio - 0.5), 0.2, "<=",
                        fmt("ratio %.4f, required in [0.3, 0.7]", ratio)));
  const double lipschitz =
      std::abs(table.rows.back().estimate.lambda[0] - table.rows.front().estimate.lambda[0]) / (grid.back() - grid[0]);
  const double max_diff = *std::max_element(table.successive_differences.begin(), table.successive_differences.end());
  out.push_back(compare("lipschitz-bound.sl2-shear", max_diff, 5.0 * lipschitz * 0.01, "<=",
                        fmt("empirical Lipschitz constant %.6f", lipschitz)));

  const RepresentationFamily conjugated = [](double theta) {
    Mat u = Mat::Identity(2, 2);
    u(0, 1) = theta;
    const GroupElement s = GroupElement::make(kSL2, u);
    Representation rep = unipotent_pair();
    for (auto& g : rep.table) g = s * g * s.inverse();
    return rep;
  };
  const std::vector<double> thetas{0.0, 0.5, 1.0};
  const SweepTable conj = continuity_sweep(driver, conjugated, thetas, cfg);
  double worst = 0.0;
  for (const SweepRow& row : conj.rows) worst = std::max(worst, agreement_z(row.estimate, conj.rows[0].estimate));
  out.push_back(compare("conjugation-family-constant", worst, 3.0, "<=", "theta in {0, 0.5, 1}"));

  const SweepTable flat = continuity_sweep(driver, [](double) { return unipotent_pair(); }, thetas, cfg);
  const double flat_diff = *std::max_element(flat.successive_differences.begin(), flat.successive_differences.end());
  out.push_back(compare("constant-family-identical", flat_diff, 0.0, "==", "max successive difference"));
  return out;
}

std::vector<std::string> suite_names() {
  return {"liealg-identities", "estimator-agreement", "transform-laws", "drift", "continuity"};
}

std::vector<PropertyResult> run_suite(const std::string& name, const SuiteOptions& opts) {
  if (name == "all") {
    std::vector<PropertyResult> out;
    for (const auto& n : suite_names()) {
      auto part = run_suite(n, opts);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (name == "liealg-identities") return liealg_identities(opts);
  if (name == "estimator-agreement") {
    auto out = diagonal_exactness(opts);
    auto more = estimator_agreement(opts);
    out.insert(out.end(), more.begin(), more.end());
    return out;
  }
  if (name == "transform-laws") return transform_laws(opts);
  if (name == "drift") return drift_dichotomy(opts);
  if (name == "continuity") return continuity(opts);
  throw ConfigError("unknown suite '" + name + "'");
}

bool all_pass(const std::vector<PropertyResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const PropertyResult& r) { return r.status == PropertyStatus::Pass; });
}

std::string format_table(const std::vector<PropertyResult>& results) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-40s %-13s %14s %3s %14s  %s\n", "property", "status", "measured", "", "required",
                "detail");
  out += line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-40s %-13s %14.6g %3s %14.6g  %s\n", r.name.c_str(), to_string(r.status),
                  r.measured, r.comparator.c_str(), r.required, r.detail.c_str());
    out += line;
  }
  return out;
}

}  // namespace lyaplab
