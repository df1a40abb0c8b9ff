#pragma once

// Structural transforms of cocycles: first-return induction onto a union
// of cylinders, conjugation by a bounded state-dependent table, and flows
// under a piecewise-constant roof with their time-t and cross-section maps.
// Every transform is itself an IncrementSource, so estimators accept them
// unchanged.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lyaplab/engine.hpp"
#include "lyaplab/stream.hpp"

namespace lyaplab {

inline constexpr std::int64_t kReturnAbortThreshold = 10'000'000;
inline constexpr int kMaxCylinderDepth = 8;

// {x : symbol(T^i x) == pattern[i] for i < depth}; depth 0 is the whole space.
struct Cylinder {
  std::vector<std::size_t> pattern;
};

class Membership {
 public:
  explicit Membership(std::vector<Cylinder> cylinders);
  static Membership everything() { return Membership({Cylinder{}}); }

  std::size_t depth() const { return depth_; }
  // upcoming[i] is the symbol at T^i x; must hold at least depth() entries.
  bool contains(std::span<const std::size_t> upcoming) const;
  const std::vector<Cylinder>& cylinders() const { return cylinders_; }

 private:
  std::vector<Cylinder> cylinders_;
  std::size_t depth_ = 0;
};

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Fraction of time each trajectory spends in the set, averaged over
// trajectories.
MeanEstimate estimate_set_measure(const IncrementSource& parent, const Membership& membership,
                                  const EstimatorConfig& cfg);

class InducedSource final : public IncrementSource {
 public:
  InducedSource(std::shared_ptr<const IncrementSource> parent, Membership membership,
                std::int64_t abort_threshold = kReturnAbortThreshold, std::int64_t renorm_interval = 10'000);

  GroupModel model() const override { return parent_->model(); }
  std::unique_ptr<IncrementStream> open(std::uint64_t seed, std::uint64_t trajectory) const override;
  std::string describe() const override;

  const Membership& membership() const { return membership_; }
  const IncrementSource& parent() const { return *parent_; }

 private:
  std::shared_ptr<const IncrementSource> parent_;
  Membership membership_;
  std::int64_t abort_threshold_;
  std::int64_t renorm_interval_;
};

// Pilot-checks that the set has empirical measure >= 1e-3, then returns
// the induced cocycle F'(x) = F_{n(x)}(x). Increment::ticks is n(x).
std::shared_ptr<InducedSource> induce(std::shared_ptr<const IncrementSource> parent, Membership membership,
                                      const EstimatorConfig& cfg);

// Mean first-return time n(x) over cfg.window() induced steps per trajectory.
MeanEstimate return_time_statistics(const InducedSource& induced, const EstimatorConfig& cfg);

// D(x) = s(Tx) F(x) s(x)^-1 with s given per base symbol.
class ConjugateSource final : public IncrementSource {
 public:
  ConjugateSource(std::shared_ptr<const IncrementSource> parent, std::vector<GroupElement> table);

  GroupModel model() const override { return parent_->model(); }
  std::unique_ptr<IncrementStream> open(std::uint64_t seed, std::uint64_t trajectory) const override;
  std::string describe() const override;

 private:
  std::shared_ptr<const IncrementSource> parent_;
  std::shared_ptr<const std::vector<Mat>> table_;
  std::shared_ptr<const std::vector<Mat>> inverse_table_;
};

std::shared_ptr<ConjugateSource> conjugate(std::shared_ptr<const IncrementSource> parent,
                                           std::vector<GroupElement> table);

// Flow under the graph of a per-symbol roof over a base cocycle. The flow
// cocycle applies the base increment of x when the flow crosses the roof
// above x.
struct Suspension {
  std::shared_ptr<const IncrementSource> base;
  std::vector<double> roof;
  double delta = 0.0;

  // delta > 0 and roof >= 2 delta everywhere.
  void validate() const;
  double roof_at(std::size_t symbol) const;
};

// Time-t map of the flow: increments are the ordered products of base
// increments whose roof crossings fall in (tau, tau + t]; ticks counts them.
class FlowDiscretizationSource final : public IncrementSource {
 public:
  FlowDiscretizationSource(Suspension suspension, double t);

  GroupModel model() const override { return suspension_.base->model(); }
  std::unique_ptr<IncrementStream> open(std::uint64_t seed, std::uint64_t trajectory) const override;
  std::string describe() const override;

 private:
  Suspension suspension_;
  double t_;
};

std::shared_ptr<FlowDiscretizationSource> discretize_flow(Suspension suspension, double t);

// Integer cocycle on the section: w(x) = c_{r(x)}(x).
class CrossSectionSource final : public IncrementSource {
 public:
  explicit CrossSectionSource(Suspension suspension);

  GroupModel model() const override { return suspension_.base->model(); }
  std::unique_ptr<IncrementStream> open(std::uint64_t seed, std::uint64_t trajectory) const override;
  std::string describe() const override;

 private:
  Suspension suspension_;
};

struct CrossSection {
  std::shared_ptr<CrossSectionSource> greg;
  // Birkhoff estimate of the roof integral over the base.
  MeanEstimate roof_integral;
};

CrossSection cross_section_greg(Suspension suspension, const EstimatorConfig& cfg);

}  // namespace lyaplab
