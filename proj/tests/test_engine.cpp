#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "lyaplab/engine.hpp"
#include "lyaplab/errors.hpp"
#include "lyaplab/oracles.hpp"
#include "lyaplab/rng.hpp"

using namespace lyaplab;

namespace {

const GroupModel kSL2 = GroupModel::special_linear(2);
const GroupModel kSL3 = GroupModel::special_linear(3);

const double kDiagonalLambda = 0.5 * (std::log(2.0) + std::log(3.0));

GroupElement element(const GroupModel& model, std::initializer_list<double> entries) {
  Mat m(model.dim, model.dim);
  auto it = entries.begin();
  for (int i = 0; i < model.dim; ++i) {
    for (int j = 0; j < model.dim; ++j) m(i, j) = *it++;
  }
  return GroupElement::make(model, m);
}

Representation diagonal_pair() {
  return {kSL2, {element(kSL2, {2, 0, 0, 0.5}), element(kSL2, {3, 0, 0, 1.0 / 3.0})}};
}

Representation unipotent_pair() { return {kSL2, {element(kSL2, {1, 1, 0, 1}), element(kSL2, {1, 0, 1, 1})}}; }

Representation sl3_pair() {
  return {kSL3, {element(kSL3, {2, 1, 0, 1, 1, 0, 0, 0, 1}), element(kSL3, {1, 0, 0, 0, 1, 1, 1, 1, 2})}};
}

Representation constant(const GroupElement& g) { return {g.model(), {g}}; }

std::shared_ptr<const GregDriver> iid(const Representation& rep, std::uint64_t seed = 11) {
  std::vector<double> p(rep.size(), 1.0 / static_cast<double>(rep.size()));
  return std::make_shared<const GregDriver>(GregDriver::iid(rep, p, seed));
}

EstimatorConfig config(std::int64_t n_steps, std::int64_t n_trajectories, std::uint64_t seed = 11) {
  EstimatorConfig cfg;
  cfg.n_steps = n_steps;
  cfg.n_trajectories = n_trajectories;
  cfg.burn_in = std::min<std::int64_t>(1000, n_steps / 10);
  cfg.seed = seed;
  return cfg;
}

double combined(const SpectrumEstimate& a, const SpectrumEstimate& b, int i) {
  const auto k = static_cast<std::size_t>(i);
  return std::hypot(a.stderr_[k], b.stderr_[k]);
}

void check_sorted_and_symmetric(const SpectrumEstimate& e) {
  CHECK(e.lambda.is_sorted_nonincreasing());
  CHECK(std::abs(e.lambda.coords.sum()) < 1e-9);
}

}  // namespace

TEST_CASE("identity cocycle gives zero on every estimator") {
  const Representation rep = constant(GroupElement::identity(kSL3));
  const auto d = iid(rep);
  const EstimatorConfig cfg = config(5000, 4);
  for (const EstimatorMethod m :
       {EstimatorMethod::KingmanQR, EstimatorMethod::IwasawaFormula, EstimatorMethod::BlockSVD}) {
    CocycleSource src(d, rep);
    const SpectrumEstimate e = estimate(m, src, cfg);
    for (int i = 0; i < 3; ++i) CHECK(e.lambda[i] == 0.0);
    CHECK(e.method == m);
    CHECK(e.n_steps == 5000);
    CHECK(e.n_trajectories == 4);
  }
}

TEST_CASE("diagonal iid matches the exact expectation") {
  const Representation rep = diagonal_pair();
  const auto d = iid(rep);
  const EstimatorConfig cfg = config(100'000, 64);
  const SpectrumEstimate qr = estimate_kingman_qr(d, rep, cfg);
  const SpectrumEstimate iw = estimate_iwasawa_formula(d, rep, cfg);
  for (const auto* e : {&qr, &iw}) {
    CHECK(std::abs(e->lambda[0] - kDiagonalLambda) <= 3 * e->stderr_[0]);
    CHECK(std::abs(e->lambda[1] + kDiagonalLambda) <= 3 * e->stderr_[1]);
    check_sorted_and_symmetric(*e);
    CHECK(e->per_trajectory.size() == 64);
  }
}

TEST_CASE("block svd agrees with qr on identical streams") {
  const Representation rep = diagonal_pair();
  const auto d = iid(rep);
  const EstimatorConfig cfg = config(10'000, 16);
  const SpectrumEstimate qr = estimate_kingman_qr(d, rep, cfg);
  const SpectrumEstimate svd = estimate_block_svd(d, rep, cfg);
  for (std::size_t k = 0; k < 16; ++k) {
    for (int i = 0; i < 2; ++i) CHECK(std::abs(qr.per_trajectory[k][i] - svd.per_trajectory[k][i]) < 1e-6);
  }

  // Non-commuting: the two differ by O(1/n) per trajectory, so compare at
  // the statistical scale.
  const Representation rep3 = sl3_pair();
  const auto d3 = iid(rep3);
  const SpectrumEstimate qr3 = estimate_kingman_qr(d3, rep3, cfg);
  const SpectrumEstimate svd3 = estimate_block_svd(d3, rep3, cfg);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(qr3.lambda[i] - svd3.lambda[i]) <= 3 * combined(qr3, svd3, i));
}

TEST_CASE("block svd over a single step is the Cartan projection") {
  const GroupElement g = element(kSL3, {2, 1, 0, 1, 1, 0, 0, 0, 1});
  const Representation rep = constant(g);
  EstimatorConfig cfg = config(1, 3);
  cfg.burn_in = 0;
  const SpectrumEstimate e = estimate_block_svd(iid(rep), rep, cfg);
  const CartanVector k = cartan_projection(g);
  for (int i = 0; i < 3; ++i) CHECK(e.lambda[i] == doctest::Approx(k[i]).epsilon(1e-13));
}

TEST_CASE("graded singular values match a dense svd") {
  oracles::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 4;
    Vec scale(d);
    for (int i = 0; i < d; ++i) scale[i] = -3.0 * i + 0.1 * trial;
    Mat n = Mat::Identity(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) n(i, j) = std::normal_distribution<double>()(rng);
    }
    const Eigen::MatrixXd dense = scale.array().exp().matrix().asDiagonal() * Eigen::MatrixXd(n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
    const Vec got = graded_log_singular_values(scale, n);
    for (int i = 0; i < d; ++i) CHECK(got[i] == doctest::Approx(std::log(svd.singularValues()[i])).epsilon(1e-9));
  }
}

TEST_CASE("unipotent pair: positive exponent, estimators agree, simple") {
  const Representation rep = unipotent_pair();
  const auto d = iid(rep);
  const EstimatorConfig cfg = config(100'000, 64);
  const SpectrumEstimate qr = estimate_kingman_qr(d, rep, cfg);
  const SpectrumEstimate iw = estimate_iwasawa_formula(d, rep, cfg);
  CHECK(qr.lambda[0] > 3 * qr.stderr_[0]);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(qr.lambda[i] - iw.lambda[i]) <= 3 * combined(qr, iw, i));
  CHECK(simplicity_report(qr, RootSystemInfo::for_model(kSL2)).verdict == SimplicityVerdict::Simple);
  CHECK(simplicity_report(iw, RootSystemInfo::for_model(kSL2)).verdict == SimplicityVerdict::Simple);
}

TEST_CASE("iwasawa formula on a constant regular diagonal element") {
  const Representation rep = constant(element(kSL2, {std::exp(2.0), 0, 0, std::exp(-2.0)}));
  const SpectrumEstimate e = estimate_iwasawa_formula(iid(rep), rep, config(2000, 2));
  CHECK(e.lambda[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.lambda[1] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("flag tracking examples") {
  const Representation diag = constant(element(kSL2, {std::exp(1.0), 0, 0, std::exp(-1.0)}));
  const TrajectoryCursor c = sample_initial(iid(diag), 0);
  const Flag from_generic = track_forward_flag(c, diag, 60);
  CHECK(flag_distance(from_generic, Flag::standard(2)) < 1e-12);

  const Representation ident = constant(GroupElement::identity(kSL3));
  oracles::Rng rng(5);
  const Flag ref = oracles::random_flag(rng, 3);
  const Flag out = track_forward_flag(sample_initial(iid(ident), 0), ident, 50, ref);
  CHECK(flag_distance(out, ref) < 1e-14);
}

TEST_CASE("flag tracking is Cauchy in the burn-in") {
  const Representation rep = unipotent_pair();
  const auto d = iid(rep);
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const TrajectoryCursor c = sample_initial(d, t);
    worst = std::max(worst, flag_distance(track_forward_flag(c, rep, 200), track_forward_flag(c, rep, 400)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("flag tracking equivariance decays geometrically") {
  for (const Representation& rep : {unipotent_pair(), sl3_pair()}) {
    const auto d = iid(rep);
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::int64_t burn = 2; burn <= 20; burn += 2) {
      double log_sum = 0.0;
      const int n_traj = 50;
      for (int t = 0; t < n_traj; ++t) {
        const TrajectoryCursor x = sample_initial(d, static_cast<std::uint64_t>(t));
        TrajectoryCursor tx = x;
        const GroupElement f = step_forward(tx);
        const Flag at_x = track_forward_flag(x, rep, burn, Flag::generic(rep.model.dim));
        const Flag at_tx = track_forward_flag(tx, rep, burn, Flag::generic(rep.model.dim));
        const Flag pushed = iwasawa_cocycle(f, at_x).xi;
        log_sum += std::log(std::max(flag_distance(at_tx, pushed), 1e-300));
      }
      xs.push_back(static_cast<double>(burn));
      ys.push_back(log_sum / n_traj);
    }
    // Least-squares line through (burn, mean log distance).
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double r2 = sxy * sxy / (sxx * syy);
    CHECK(slope < 0.0);
    CHECK(r2 > 0.9);
  }
}

TEST_CASE("kesten drift check examples") {
  const std::int64_t horizon = 1000;
  const int n_traj = 32;
  auto constant_h = [&](double h) {
    std::vector<double> samples(n_traj, h);
    PartialSums sums = [=](std::int64_t n) { return std::vector<double>(n_traj, h * static_cast<double>(n)); };
    return kesten_drift_check(samples, sums, horizon);
  };
  const KestenReport one = constant_h(1.0);
  CHECK(one.verdict == DriftVerdict::Positive);
  CHECK(one.mean == 1.0);
  CHECK(constant_h(0.0).verdict == DriftVerdict::Zero);
  CHECK(constant_h(-1.0).verdict == DriftVerdict::Negative);

  // Fair +-1 coin: per-trajectory mean has sd 1/sqrt(n).
  const std::int64_t n = 100'000;
  std::vector<std::vector<double>> walks(n_traj);
  std::vector<double> rates(n_traj);
  for (int t = 0; t < n_traj; ++t) {
    double s = 0.0;
    double half = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      s += (counter_bits({1000, static_cast<std::uint64_t>(t), i, 0}) & 1U) ? 1.0 : -1.0;
      if (i + 1 == n / 2) half = s;
    }
    walks[static_cast<std::size_t>(t)] = {half, s};
    rates[static_cast<std::size_t>(t)] = s / static_cast<double>(n);
  }
  PartialSums sums = [&](std::int64_t at) {
    std::vector<double> out;
    for (const auto& w : walks) out.push_back(at == n ? w[1] : w[0]);
    return out;
  };
  const KestenReport coin = kesten_drift_check(rates, sums, n);
  CHECK((coin.verdict == DriftVerdict::Zero || coin.verdict == DriftVerdict::Inconclusive));
  CHECK(std::abs(coin.mean) <= 3 * coin.stderr_);

  CHECK_THROWS_AS(kesten_drift_check(std::vector<double>{}, sums, n), InvalidArgument);
}

TEST_CASE("drift series on a positive scenario") {
  const Representation rep = unipotent_pair();
  CocycleSource src(iid(rep), rep);
  const DriftSeries series = drift_series(src, config(20'000, 16), 0);
  CHECK(series.horizon() == 19'000);
  const KestenReport r = kesten_drift_check(series);
  CHECK(r.verdict == DriftVerdict::Positive);
  CHECK(r.fraction_diverging > 0.99);
}

TEST_CASE("simplicity report examples") {
  SpectrumEstimate e;
  e.lambda = CartanVector::from(std::vector<double>{2, 1, -3});
  e.stderr_ = {1e-6, 1e-6, 1e-6};
  e.per_trajectory = {e.lambda, e.lambda};
  const SimplicityReport simple = simplicity_report(e, RootSystemInfo::for_model(kSL3));
  CHECK(simple.verdict == SimplicityVerdict::Simple);
  CHECK(simple.min_gap == doctest::Approx(1.0));

  e.lambda = CartanVector::zero(3);
  e.per_trajectory = {e.lambda, e.lambda};
  e.stderr_ = {0, 0, 0};
  CHECK(simplicity_report(e, RootSystemInfo::for_model(kSL3)).verdict == SimplicityVerdict::NotSimple);

  // Gap comparable to its noise: inconclusive.
  e.per_trajectory = {CartanVector::from(std::vector<double>{0.3, 0.0, -0.3}),
                      CartanVector::from(std::vector<double>{-0.1, 0.0, 0.1})};
  e.lambda = CartanVector::from(std::vector<double>{0.1, 0.0, -0.1});
  e.stderr_ = {0.2, 0.0, 0.2};
  CHECK(simplicity_report(e, RootSystemInfo::for_model(kSL3)).verdict == SimplicityVerdict::Inconclusive);
}

TEST_CASE("continuity sweep examples") {
  const auto d = iid(unipotent_pair());
  const EstimatorConfig cfg = config(20'000, 16);

  const std::vector<double> thetas{0.0, 0.5, 1.0};
  const SweepTable flat = continuity_sweep(d, [](double) { return unipotent_pair(); }, thetas, cfg);
  REQUIRE(flat.rows.size() == 3);
  for (const double diff : flat.successive_differences) CHECK(diff == 0.0);

  // Conjugation by exp(theta E12) preserves the spectrum.
  RepresentationFamily conj = [](double theta) {
    Mat u = Mat::Identity(2, 2);
    u(0, 1) = theta;
    const GroupElement s = GroupElement::make(kSL2, u);
    Representation base = unipotent_pair();
    for (auto& g : base.table) g = s * g * s.inverse();
    return base;
  };
  const SweepTable conj_table = continuity_sweep(d, conj, thetas, cfg);
  for (const auto& row : conj_table.rows) {
    const auto& ref = conj_table.rows.front().estimate;
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(row.estimate.lambda[i] - ref.lambda[i]) <= 3 * combined(row.estimate, ref, i));
    }
  }

  RepresentationFamily shear = [](double theta) {
    return Representation{kSL2, {element(kSL2, {1, 1 + theta, 0, 1}), element(kSL2, {1, 0, 1, 1})}};
  };
  const std::vector<double> fine{0.0, 0.01, 0.02, 0.03, 0.04};
  const SweepTable table = continuity_sweep(d, shear, fine, cfg);
  REQUIRE(table.refinement_ratio.has_value());
  CHECK(*table.refinement_ratio > 0.3);
  CHECK(*table.refinement_ratio < 0.7);
  const double lipschitz = (table.rows.back().estimate.lambda[0] - table.rows.front().estimate.lambda[0]) / 0.04;
  for (const double diff : table.successive_differences) CHECK(diff < 5 * std::abs(lipschitz) * 0.01);
}

TEST_CASE("fekete surrogate on the block svd curve") {
  const Representation rep = unipotent_pair();
  EstimatorConfig cfg = config(9000, 32);
  cfg.checkpoint_every = 500;
  const SpectrumEstimate e = estimate_block_svd(iid(rep), rep, cfg);
  for (const CurvePoint& p : e.convergence_curve) {
    for (const CurvePoint& q : e.convergence_curve) {
      if (q.n == 2 * p.n) CHECK(q.lambda[0] <= p.lambda[0] + 5 * p.stderr_[0]);
    }
  }
}

TEST_CASE("convergence curve and checkpoints") {
  EstimatorConfig cfg = config(10'000, 4);
  CHECK(cfg.checkpoints() == std::vector<std::int64_t>{1000, 2000, 4000, 8000, 9000});
  cfg.checkpoint_every = 3000;
  CHECK(cfg.checkpoints() == std::vector<std::int64_t>{3000, 6000, 9000});
  const Representation rep = diagonal_pair();
  const SpectrumEstimate e = estimate_kingman_qr(iid(rep), rep, cfg);
  REQUIRE(e.convergence_curve.size() == 3);
  CHECK(e.convergence_curve.back().lambda[0] == e.lambda[0]);
}

TEST_CASE("serial and threaded runs are bit-identical") {
  const Representation rep = sl3_pair();
  const auto d = iid(rep);
  EstimatorConfig cfg = config(5000, 12);
  for (const EstimatorMethod m :
       {EstimatorMethod::KingmanQR, EstimatorMethod::IwasawaFormula, EstimatorMethod::BlockSVD}) {
    CocycleSource src(d, rep);
    cfg.threads = 1;
    const SpectrumEstimate serial = estimate(m, src, cfg);
    cfg.threads = 8;
    const SpectrumEstimate threaded = estimate(m, src, cfg);
    CHECK(serial.lambda.coords == threaded.lambda.coords);
    CHECK(serial.stderr_ == threaded.stderr_);
  }
}

TEST_CASE("symplectic estimates satisfy the pairing") {
  oracles::Rng rng(9);
  const GroupModel sp4 = GroupModel::symplectic(4);
  const Representation rep{sp4, {oracles::random_sp(rng, 4), oracles::random_sp(rng, 4)}};
  const SpectrumEstimate e = estimate_kingman_qr(iid(rep), rep, config(5000, 8));
  CHECK(e.lambda.is_sorted_nonincreasing());
  CHECK(e.lambda[0] == doctest::Approx(-e.lambda[3]).epsilon(1e-12));
  CHECK(e.lambda[1] == doctest::Approx(-e.lambda[2]).epsilon(1e-12));
}

TEST_CASE("config and method validation") {
  EstimatorConfig cfg;
  cfg.burn_in = cfg.n_steps;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = EstimatorConfig{};
  cfg.n_trajectories = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  CHECK(parse_method("block_svd") == EstimatorMethod::BlockSVD);
  CHECK_THROWS_AS(parse_method("lanczos"), InvalidArgument);
  CartanVector mean;
  std::vector<double> se;
  CHECK_THROWS_AS(summarize({}, mean, se), InvalidArgument);
}
