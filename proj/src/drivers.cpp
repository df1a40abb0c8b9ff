#include "lyaplab/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "lyaplab/rng.hpp"

namespace lyaplab {

namespace {

// Counter streams; distinct per purpose so draws never collide.
enum : std::uint64_t {
  kStreamForward = 0,
  kStreamBackward = 1,
  kStreamInitial = 2,
  kStreamRotation = 3,
  kStreamBurnIn = 4,
};

constexpr std::int64_t kRenormInterval = 10'000;

std::vector<double> cumulative_of(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  if (!c.empty()) c.back() = 1.0;
  return c;
}

void check_distribution(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw InvalidArgument(std::string(what) + " is empty");
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument(std::string(what) + " does not sum to 1");
}

void check_labels(const Representation& labels, std::size_t needed) {
  if (labels.size() != needed) {
    throw InvalidArgument("driver needs " + std::to_string(needed) + " labels, got " +
                          std::to_string(labels.size()));
  }
  for (const auto& g : labels.table) {
    if (!(g.model() == labels.model)) throw InvalidArgument("label group model mismatch");
  }
}

// Irreducible and aperiodic: strongly connected, and the gcd of
// level[u] + 1 - level[v] over edges of a BFS tree from state 0 is 1.
void check_ergodic_chain(const Eigen::MatrixXd& p) {
  const auto n = static_cast<std::size_t>(p.rows());
  auto reach = [&](bool transpose) {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        const double w = transpose ? p(v, u) : p(u, v);
        if (w > 0.0 && !seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  if (!reach(false) || !reach(true)) throw InvalidArgument("Markov chain is not irreducible");

  std::vector<long> level(n, -1);
  std::queue<std::size_t> q;
  q.push(0);
  level[0] = 0;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  long period = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0.0) period = std::gcd(period, std::labs(level[u] + 1 - level[v]));
    }
  }
  if (period != 1) throw InvalidArgument("Markov chain is periodic (period " + std::to_string(period) + ")");
}

std::vector<double> solve_stationary(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b[n] = 1.0;
  const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
  std::vector<double> out(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = std::max(0.0, pi[i]);
    sum += out[static_cast<std::size_t>(i)];
  }
  for (double& x : out) x /= sum;
  return out;
}

bool looks_rational(double alpha) {
  for (int q = 1; q <= 1000; ++q) {
    const double scaled = alpha * q;
    if (std::abs(scaled - std::round(scaled)) < 1e-9) return true;
  }
  return false;
}

}  // namespace

const char* to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::IID:
      return "iid";
    case DriverKind::MarkovShift:
      return "markov";
    case DriverKind::IrrationalRotation:
      return "rotation";
  }
  return "?";
}

GregDriver GregDriver::iid(Representation labels, std::vector<double> probabilities, std::uint64_t seed) {
  check_distribution(probabilities, "IID probability vector");
  check_labels(labels, probabilities.size());
  GregDriver d;
  d.kind_ = DriverKind::IID;
  d.seed_ = seed;
  d.labels_ = std::move(labels);
  d.cumulative_ = cumulative_of(probabilities);
  d.probabilities_ = std::move(probabilities);
  return d;
}

GregDriver GregDriver::markov(Representation labels, Eigen::MatrixXd transition, std::vector<double> stationary,
                              std::uint64_t seed) {
  const Eigen::Index n = transition.rows();
  if (n < 1 || transition.cols() != n) throw InvalidArgument("transition matrix must be square and non-empty");
  if (n > 65535) throw InvalidArgument("too many Markov states");
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = transition(i, j);
    check_distribution(row, "transition matrix row");
  }
  check_ergodic_chain(transition);
  check_labels(labels, static_cast<std::size_t>(n));

  GregDriver d;
  d.kind_ = DriverKind::MarkovShift;
  d.seed_ = seed;
  d.labels_ = std::move(labels);
  d.transition_ = transition;
  if (!stationary.empty()) {
    if (stationary.size() != static_cast<std::size_t>(n)) throw InvalidArgument("stationary law has wrong size");
    check_distribution(stationary, "stationary law");
    for (Eigen::Index j = 0; j < n; ++j) {
      double flow = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) flow += stationary[static_cast<std::size_t>(i)] * transition(i, j);
      if (std::abs(flow - stationary[static_cast<std::size_t>(j)]) > 1e-9) {
        throw InvalidArgument("supplied law is not stationary for the transition matrix");
      }
    }
    d.stationary_ = std::move(stationary);
    d.stationary_supplied_ = true;
  } else {
    d.stationary_ = solve_stationary(transition);
  }
  d.stationary_cdf_ = cumulative_of(d.stationary_);

  const auto un = static_cast<std::size_t>(n);
  d.forward_cdf_.resize(un);
  d.backward_cdf_.resize(un);
  for (std::size_t i = 0; i < un; ++i) {
    std::vector<double> fwd(un);
    std::vector<double> bwd(un);
    for (std::size_t j = 0; j < un; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      fwd[j] = transition(ii, jj);
      // Time reversal: P~(i -> j) = pi_j P(j -> i) / pi_i.
      bwd[j] = d.stationary_[j] * transition(jj, ii) / d.stationary_[i];
    }
    const double total = std::accumulate(bwd.begin(), bwd.end(), 0.0);
    for (double& x : bwd) x /= total;
    d.forward_cdf_[i] = cumulative_of(fwd);
    d.backward_cdf_[i] = cumulative_of(bwd);
  }
  return d;
}

GregDriver GregDriver::rotation(Representation labels, double alpha, std::vector<double> breakpoints,
                                std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("rotation angle must lie in (0, 1)");
  if (looks_rational(alpha)) throw InvalidArgument("rotation angle is rational with denominator <= 1000");
  if (breakpoints.empty()) throw InvalidArgument("rotation needs at least one breakpoint");
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] >= 0.0 && breakpoints[i] < 1.0)) throw InvalidArgument("breakpoint outside [0, 1)");
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) {
      throw InvalidArgument("breakpoints must be strictly increasing");
    }
  }
  check_labels(labels, breakpoints.size());
  GregDriver d;
  d.kind_ = DriverKind::IrrationalRotation;
  d.seed_ = seed;
  d.labels_ = std::move(labels);
  d.alpha_ = alpha;
  d.breakpoints_ = std::move(breakpoints);
  return d;
}

GregDriver GregDriver::with_seed(std::uint64_t seed) const {
  GregDriver copy = *this;
  copy.seed_ = seed;
  return copy;
}

void GregDriver::set_max_horizon(std::int64_t horizon) {
  if (horizon < 1) throw InvalidArgument("max horizon must be positive");
  max_horizon_ = horizon;
}

std::size_t GregDriver::n_symbols() const {
  switch (kind_) {
    case DriverKind::IID:
      return probabilities_.size();
    case DriverKind::MarkovShift:
      return static_cast<std::size_t>(transition_.rows());
    case DriverKind::IrrationalRotation:
      return breakpoints_.size();
  }
  return 0;
}

std::size_t GregDriver::sample_categorical(const std::vector<double>& cumulative, double u) const {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto idx = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(idx, cumulative.size() - 1);
}

std::size_t GregDriver::markov_forward(std::size_t state, double u) const {
  return sample_categorical(forward_cdf_[state], u);
}

std::size_t GregDriver::markov_backward(std::size_t state, double u) const {
  return sample_categorical(backward_cdf_[state], u);
}

std::size_t GregDriver::rotation_symbol(long double position) const {
  const auto x = static_cast<double>(position);
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.begin()) return breakpoints_.size() - 1;
  return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

std::size_t GregDriver::iid_symbol(std::uint64_t trajectory, std::int64_t time) const {
  return sample_categorical(cumulative_, counter_uniform({seed_, trajectory, time, kStreamForward}));
}

TrajectoryCursor::TrajectoryCursor(std::shared_ptr<const GregDriver> driver, std::uint64_t trajectory)
    : driver_(std::move(driver)), trajectory_(trajectory) {
  if (!driver_) throw InvalidArgument("null driver");
  const GregDriver& d = *driver_;
  switch (d.kind_) {
    case DriverKind::IID:
      break;
    case DriverKind::MarkovShift: {
      const double u0 = counter_uniform({d.seed_, trajectory_, 0, kStreamInitial});
      std::size_t state = 0;
      if (d.stationary_supplied_) {
        state = d.sample_categorical(d.stationary_cdf_, u0);
      } else {
        state = std::min(static_cast<std::size_t>(u0 * static_cast<double>(d.n_symbols())), d.n_symbols() - 1);
        for (int t = 0; t < kMarkovBurnIn; ++t) {
          state = d.markov_forward(state, counter_uniform({d.seed_, trajectory_, t, kStreamBurnIn}));
        }
      }
      window_.push_back(static_cast<std::uint16_t>(state));
      window_start_ = 0;
      break;
    }
    case DriverKind::IrrationalRotation:
      rotation_origin_ = static_cast<long double>(counter_uniform({d.seed_, trajectory_, 0, kStreamRotation}));
      break;
  }
}

std::size_t TrajectoryCursor::markov_state(std::int64_t t) {
  const GregDriver& d = *driver_;
  while (t >= window_start_ + static_cast<std::int64_t>(window_.size())) {
    const std::int64_t last = window_start_ + static_cast<std::int64_t>(window_.size()) - 1;
    const double u = counter_uniform({d.seed_, trajectory_, last, kStreamForward});
    window_.push_back(static_cast<std::uint16_t>(d.markov_forward(window_.back(), u)));
  }
  while (t < window_start_) {
    const double u = counter_uniform({d.seed_, trajectory_, window_start_, kStreamBackward});
    window_.push_front(static_cast<std::uint16_t>(d.markov_backward(window_.front(), u)));
    --window_start_;
  }
  return window_[static_cast<std::size_t>(t - window_start_)];
}

std::size_t TrajectoryCursor::symbol(std::int64_t offset) {
  const std::int64_t t = time_ + offset;
  const GregDriver& d = *driver_;
  switch (d.kind_) {
    case DriverKind::IID:
      return d.iid_symbol(trajectory_, t);
    case DriverKind::MarkovShift:
      return markov_state(t);
    case DriverKind::IrrationalRotation: {
      long double x = rotation_origin_ + static_cast<long double>(t) * static_cast<long double>(d.alpha_);
      x -= std::floor(x);
      return d.rotation_symbol(x);
    }
  }
  return 0;
}

std::size_t TrajectoryCursor::advance() {
  const std::size_t s = symbol(0);
  ++time_;
  return s;
}

std::size_t TrajectoryCursor::retreat() {
  --time_;
  return symbol(0);
}

TrajectoryCursor sample_initial(std::shared_ptr<const GregDriver> driver, std::uint64_t trajectory) {
  return TrajectoryCursor(std::move(driver), trajectory);
}

GroupElement step_forward(TrajectoryCursor& cursor) { return cursor.driver().labels()[cursor.advance()]; }

GroupElement step_backward(TrajectoryCursor& cursor) { return cursor.driver().labels()[cursor.retreat()]; }

GroupElement cocycle_product(const TrajectoryCursor& cursor, const Representation& rep, std::int64_t n) {
  if (std::abs(n) > cursor.driver().max_horizon()) {
    throw InvalidArgument("cocycle horizon " + std::to_string(n) + " exceeds the configured maximum");
  }
  TrajectoryCursor walker = cursor;
  GroupElement product = GroupElement::identity(rep.model);
  if (n > 0) {
    for (std::int64_t i = 0; i < n; ++i) {
      product = rep[walker.advance()] * product;
      if ((i + 1) % kRenormInterval == 0) product = product.renormalized();
    }
  } else if (n < 0) {
    // w(T^-|n| x)^-1 ... w(T^-1 x)^-1: newest inverse goes on the left.
    for (std::int64_t i = 0; i < -n; ++i) {
      product = rep[walker.retreat()].inverse() * product;
      if ((i + 1) % kRenormInterval == 0) product = product.renormalized();
    }
  }
  return product;
}

GroupElement cocycle_product(const TrajectoryCursor& cursor, std::int64_t n) {
  return cocycle_product(cursor, cursor.driver().labels(), n);
}

CocycleSource::CocycleSource(std::shared_ptr<const GregDriver> driver, Representation rep)
    : driver_(std::move(driver)) {
  if (!driver_) throw InvalidArgument("null driver");
  if (rep.size() != driver_->n_symbols()) {
    throw InvalidArgument("representation table has " + std::to_string(rep.size()) + " entries, driver has " +
                          std::to_string(driver_->n_symbols()) + " symbols");
  }
  for (const auto& g : rep.table) {
    if (!(g.model() == rep.model)) throw InvalidArgument("representation group model mismatch");
  }
  rep_ = std::make_shared<const Representation>(std::move(rep));
}

std::unique_ptr<IncrementStream> CocycleSource::open(std::uint64_t seed, std::uint64_t trajectory) const {
  auto reseeded = std::make_shared<const GregDriver>(driver_->with_seed(seed));
  return std::make_unique<CocycleStream>(sample_initial(std::move(reseeded), trajectory), rep_);
}

std::string CocycleSource::describe() const {
  std::ostringstream os;
  os << to_string(driver_->kind()) << " driver, " << driver_->n_symbols() << " symbols, "
     << to_string(rep_->model.kind) << "(" << rep_->model.dim << ")";
  return os.str();
}

Increment CocycleStream::next() {
  const std::size_t s = cursor_.advance();
  return {s, (*rep_)[s].matrix(), 1};
}

Increment CocycleStream::previous() {
  const std::size_t s = cursor_.retreat();
  return {s, (*rep_)[s].matrix(), 1};
}

}  // namespace lyaplab
