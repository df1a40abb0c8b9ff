#include "lyaplab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "lyaplab/parallel.hpp"

namespace lyaplab {

namespace {

constexpr double kMinPilotMeasure = 1e-3;
constexpr std::int64_t kPilotSteps = 10'000;
constexpr std::int64_t kPilotTrajectories = 8;

void renormalize(Mat& g) {
  const double det = g.determinant();
  if (det > 0.0 && std::isfinite(det)) g /= std::pow(det, 1.0 / static_cast<double>(g.rows()));
}

MeanEstimate mean_and_stderr(const std::vector<double>& x) {
  MeanEstimate e;
  for (double v : x) e.mean += v;
  e.mean /= static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - e.mean) * (v - e.mean);
    e.stderr_ = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return e;
}

// Parent stream with a look-ahead window of increments.
class Lookahead {
 public:
  explicit Lookahead(std::unique_ptr<IncrementStream> parent) : parent_(std::move(parent)) {}
  Lookahead(const Lookahead& other) : parent_(other.parent_->clone()), buffer_(other.buffer_) {}

  const Increment& peek(std::size_t i) {
    while (buffer_.size() <= i) buffer_.push_back(parent_->next());
    return buffer_[i];
  }

  Increment pop() {
    peek(0);
    Increment inc = std::move(buffer_.front());
    buffer_.pop_front();
    return inc;
  }

  bool at(const Membership& membership) {
    const std::size_t depth = membership.depth();
    std::size_t upcoming[kMaxCylinderDepth];
    for (std::size_t i = 0; i < depth; ++i) upcoming[i] = peek(i).symbol;
    return membership.contains(std::span<const std::size_t>(upcoming, depth));
  }

 private:
  std::unique_ptr<IncrementStream> parent_;
  std::deque<Increment> buffer_;
};

class InducedStream final : public IncrementStream {
 public:
  InducedStream(Lookahead base, const Membership* membership, std::int64_t abort_threshold,
                std::int64_t renorm_interval)
      : base_(std::move(base)),
        membership_(membership),
        abort_threshold_(abort_threshold),
        renorm_interval_(renorm_interval) {
    std::int64_t skipped = 0;
    while (!base_.at(*membership_)) {
      base_.pop();
      if (++skipped >= abort_threshold_) throw_non_returning();
    }
  }

  Increment next() override {
    Increment first = base_.pop();
    Increment out{first.symbol, std::move(first.g), 1};
    while (!base_.at(*membership_)) {
      const Increment inc = base_.pop();
      out.g = inc.g * out.g;
      ++out.ticks;
      if (static_cast<std::int64_t>(out.ticks) >= abort_threshold_) throw_non_returning();
      if (static_cast<std::int64_t>(out.ticks) % renorm_interval_ == 0) renormalize(out.g);
    }
    return out;
  }

  std::unique_ptr<IncrementStream> clone() const override { return std::make_unique<InducedStream>(*this); }

 private:
  [[noreturn]] void throw_non_returning() const {
    throw NonReturningSet("no visit to the induced set within " + std::to_string(abort_threshold_) +
                          " steps; the set is empty or of negligible measure for this driver");
  }

  Lookahead base_;
  const Membership* membership_;
  std::int64_t abort_threshold_;
  std::int64_t renorm_interval_;
};

class ConjugateStream final : public IncrementStream {
 public:
  ConjugateStream(Lookahead base, std::shared_ptr<const std::vector<Mat>> table,
                  std::shared_ptr<const std::vector<Mat>> inverse_table)
      : base_(std::move(base)), table_(std::move(table)), inverse_table_(std::move(inverse_table)) {}

  Increment next() override {
    Increment here = base_.pop();
    const std::size_t there = base_.peek(0).symbol;
    if (here.symbol >= table_->size() || there >= table_->size()) {
      throw InvalidArgument("conjugator table has no entry for symbol " +
                            std::to_string(std::max(here.symbol, there)));
    }
    here.g = (*table_)[there] * here.g * (*inverse_table_)[here.symbol];
    return here;
  }

  std::unique_ptr<IncrementStream> clone() const override { return std::make_unique<ConjugateStream>(*this); }

 private:
  Lookahead base_;
  std::shared_ptr<const std::vector<Mat>> table_;
  std::shared_ptr<const std::vector<Mat>> inverse_table_;
};

// Flow point (x, s) with 0 <= s < r(x); `pending_` is the base increment
// at x, applied when the flow reaches the roof.
class FlowStream final : public IncrementStream {
 public:
  enum class Mode { FixedTime, Section };

  FlowStream(std::unique_ptr<IncrementStream> base, const Suspension* suspension, Mode mode, double t)
      : base_(std::move(base)), suspension_(suspension), mode_(mode), t_(t) {
    pending_ = base_->next();
  }
  FlowStream(const FlowStream& other)
      : base_(other.base_->clone()),
        suspension_(other.suspension_),
        mode_(other.mode_),
        t_(other.t_),
        pending_(other.pending_),
        height_(other.height_) {}

  Increment next() override {
    const double duration =
        mode_ == Mode::FixedTime ? t_ : suspension_->roof_at(pending_.symbol) - height_;
    return flow_for(duration);
  }

  std::unique_ptr<IncrementStream> clone() const override { return std::make_unique<FlowStream>(*this); }

 private:
  Increment flow_for(double duration) {
    const int d = static_cast<int>(pending_.g.rows());
    Increment out{pending_.symbol, Mat::Identity(d, d), 0};
    double remaining = duration;
    for (;;) {
      const double to_roof = suspension_->roof_at(pending_.symbol) - height_;
      if (to_roof > remaining) break;
      out.g = pending_.g * out.g;
      ++out.ticks;
      if (out.ticks % 10'000 == 0) renormalize(out.g);
      remaining -= to_roof;
      height_ = 0.0;
      pending_ = base_->next();
    }
    height_ += remaining;
    return out;
  }

  std::unique_ptr<IncrementStream> base_;
  const Suspension* suspension_;
  Mode mode_;
  double t_;
  Increment pending_;
  double height_ = 0.0;
};

}  // namespace

Membership::Membership(std::vector<Cylinder> cylinders) : cylinders_(std::move(cylinders)) {
  if (cylinders_.empty()) throw InvalidArgument("membership needs at least one cylinder");
  for (const auto& c : cylinders_) {
    if (c.pattern.size() > static_cast<std::size_t>(kMaxCylinderDepth)) {
      throw InvalidArgument("cylinder depth exceeds 8");
    }
    depth_ = std::max(depth_, c.pattern.size());
  }
}

bool Membership::contains(std::span<const std::size_t> upcoming) const {
  for (const auto& c : cylinders_) {
    if (upcoming.size() < c.pattern.size()) throw InvalidArgument("not enough look-ahead for membership test");
    if (std::equal(c.pattern.begin(), c.pattern.end(), upcoming.begin())) return true;
  }
  return false;
}

MeanEstimate estimate_set_measure(const IncrementSource& parent, const Membership& membership,
                                  const EstimatorConfig& cfg) {
  cfg.validate();
  auto run = [&](std::int64_t id) {
    Lookahead base(parent.open(cfg.seed, static_cast<std::uint64_t>(id)));
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < cfg.window(); ++t) {
      if (base.at(membership)) ++hits;
      base.pop();
    }
    return static_cast<double>(hits) / static_cast<double>(cfg.window());
  };
  return mean_and_stderr(parallel_map(cfg.n_trajectories, cfg.threads, run));
}

InducedSource::InducedSource(std::shared_ptr<const IncrementSource> parent, Membership membership,
                             std::int64_t abort_threshold, std::int64_t renorm_interval)
    : parent_(std::move(parent)),
      membership_(std::move(membership)),
      abort_threshold_(abort_threshold),
      renorm_interval_(renorm_interval) {
  if (!parent_) throw InvalidArgument("induced source needs a parent");
  if (abort_threshold_ < 1 || renorm_interval_ < 1) throw InvalidArgument("thresholds must be positive");
}

std::unique_ptr<IncrementStream> InducedSource::open(std::uint64_t seed, std::uint64_t trajectory) const {
  return std::make_unique<InducedStream>(Lookahead(parent_->open(seed, trajectory)), &membership_,
                                         abort_threshold_, renorm_interval_);
}

std::string InducedSource::describe() const {
  return "induced(" + parent_->describe() + ", " + std::to_string(membership_.cylinders().size()) +
         " cylinders)";
}

std::shared_ptr<InducedSource> induce(std::shared_ptr<const IncrementSource> parent, Membership membership,
                                      const EstimatorConfig& cfg) {
  EstimatorConfig pilot = cfg;
  pilot.n_trajectories = std::min<std::int64_t>(cfg.n_trajectories, kPilotTrajectories);
  pilot.n_steps = kPilotSteps;
  pilot.burn_in = 0;
  const MeanEstimate m = estimate_set_measure(*parent, membership, pilot);
  if (m.mean < kMinPilotMeasure) {
    throw NonReturningSet("induced set has empirical measure " + std::to_string(m.mean) +
                          " in a pilot run, below the 1e-3 floor");
  }
  return std::make_shared<InducedSource>(std::move(parent), std::move(membership), kReturnAbortThreshold,
                                         cfg.renorm_interval);
}

MeanEstimate return_time_statistics(const InducedSource& induced, const EstimatorConfig& cfg) {
  cfg.validate();
  auto run = [&](std::int64_t id) {
    auto stream = induced.open(cfg.seed, static_cast<std::uint64_t>(id));
    double total = 0.0;
    for (std::int64_t k = 0; k < cfg.window(); ++k) total += static_cast<double>(stream->next().ticks);
    return total / static_cast<double>(cfg.window());
  };
  return mean_and_stderr(parallel_map(cfg.n_trajectories, cfg.threads, run));
}

ConjugateSource::ConjugateSource(std::shared_ptr<const IncrementSource> parent, std::vector<GroupElement> table)
    : parent_(std::move(parent)) {
  if (!parent_) throw InvalidArgument("conjugate source needs a parent");
  if (table.empty()) throw InvalidArgument("conjugator table is empty");
  std::vector<Mat> forward;
  std::vector<Mat> inverse;
  for (const auto& s : table) {
    if (!(s.model() == parent_->model())) throw InvalidArgument("conjugator group model mismatch");
    forward.push_back(s.matrix());
    inverse.push_back(s.inverse().matrix());
  }
  table_ = std::make_shared<const std::vector<Mat>>(std::move(forward));
  inverse_table_ = std::make_shared<const std::vector<Mat>>(std::move(inverse));
}

std::unique_ptr<IncrementStream> ConjugateSource::open(std::uint64_t seed, std::uint64_t trajectory) const {
  return std::make_unique<ConjugateStream>(Lookahead(parent_->open(seed, trajectory)), table_, inverse_table_);
}

std::string ConjugateSource::describe() const { return "conjugate(" + parent_->describe() + ")"; }

std::shared_ptr<ConjugateSource> conjugate(std::shared_ptr<const IncrementSource> parent,
                                           std::vector<GroupElement> table) {
  return std::make_shared<ConjugateSource>(std::move(parent), std::move(table));
}

void Suspension::validate() const {
  if (!base) throw InvalidArgument("suspension needs a base source");
  if (!(delta > 0.0)) throw InvalidArgument("suspension delta must be positive");
  if (roof.empty()) throw InvalidArgument("suspension roof table is empty");
  for (double r : roof) {
    if (!std::isfinite(r) || r < 2.0 * delta) {
      throw InvalidArgument("roof value " + std::to_string(r) + " is below 2 * delta");
    }
  }
}

double Suspension::roof_at(std::size_t symbol) const {
  if (symbol >= roof.size()) throw InvalidArgument("roof has no value for symbol " + std::to_string(symbol));
  return roof[symbol];
}

FlowDiscretizationSource::FlowDiscretizationSource(Suspension suspension, double t)
    : suspension_(std::move(suspension)), t_(t) {
  suspension_.validate();
  if (!(t_ > 0.0) || !std::isfinite(t_)) throw InvalidArgument("flow time must be positive");
}

std::unique_ptr<IncrementStream> FlowDiscretizationSource::open(std::uint64_t seed, std::uint64_t trajectory) const {
  return std::make_unique<FlowStream>(suspension_.base->open(seed, trajectory), &suspension_,
                                      FlowStream::Mode::FixedTime, t_);
}

std::string FlowDiscretizationSource::describe() const {
  std::ostringstream os;
  os << "flow(" << suspension_.base->describe() << ", t=" << t_ << ")";
  return os.str();
}

std::shared_ptr<FlowDiscretizationSource> discretize_flow(Suspension suspension, double t) {
  return std::make_shared<FlowDiscretizationSource>(std::move(suspension), t);
}

CrossSectionSource::CrossSectionSource(Suspension suspension) : suspension_(std::move(suspension)) {
  suspension_.validate();
}

std::unique_ptr<IncrementStream> CrossSectionSource::open(std::uint64_t seed, std::uint64_t trajectory) const {
  return std::make_unique<FlowStream>(suspension_.base->open(seed, trajectory), &suspension_,
                                      FlowStream::Mode::Section, 0.0);
}

std::string CrossSectionSource::describe() const { return "section(" + suspension_.base->describe() + ")"; }

CrossSection cross_section_greg(Suspension suspension, const EstimatorConfig& cfg) {
  suspension.validate();
  cfg.validate();
  auto run = [&](std::int64_t id) {
    auto stream = suspension.base->open(cfg.seed, static_cast<std::uint64_t>(id));
    double total = 0.0;
    for (std::int64_t k = 0; k < cfg.window(); ++k) total += suspension.roof_at(stream->next().symbol);
    return total / static_cast<double>(cfg.window());
  };
  CrossSection out;
  out.roof_integral = mean_and_stderr(parallel_map(cfg.n_trajectories, cfg.threads, run));
  out.greg = std::make_shared<CrossSectionSource>(std::move(suspension));
  return out;
}

}  // namespace lyaplab
