#pragma once

// Base ergodic systems with finitely many labels, walked as seeded
// bi-infinite trajectories. Symbols index the representation table.

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "lyaplab/liealg.hpp"
#include "lyaplab/stream.hpp"

namespace lyaplab {

struct Representation {
  GroupModel model;
  std::vector<GroupElement> table;

  const GroupElement& operator[](std::size_t symbol) const { return table.at(symbol); }
  std::size_t size() const { return table.size(); }
};

enum class DriverKind { IID, MarkovShift, IrrationalRotation };

const char* to_string(DriverKind kind);

inline constexpr std::int64_t kDefaultMaxHorizon = 10'000'000;
inline constexpr int kMarkovBurnIn = 1000;

class GregDriver {
 public:
  static GregDriver iid(Representation labels, std::vector<double> probabilities, std::uint64_t seed);
  // An empty stationary law means: start uniform and discard a burn-in.
  static GregDriver markov(Representation labels, Eigen::MatrixXd transition, std::vector<double> stationary,
                           std::uint64_t seed);
  // Circle rotation by alpha; label i on [b_i, b_{i+1}), the last label wraps.
  static GregDriver rotation(Representation labels, double alpha, std::vector<double> breakpoints,
                             std::uint64_t seed);

  DriverKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  GregDriver with_seed(std::uint64_t seed) const;

  const Representation& labels() const { return labels_; }
  const GroupModel& model() const { return labels_.model; }
  std::size_t n_symbols() const;

  std::int64_t max_horizon() const { return max_horizon_; }
  void set_max_horizon(std::int64_t horizon);

  const std::vector<double>& probabilities() const { return probabilities_; }
  const Eigen::MatrixXd& transition() const { return transition_; }
  // Supplied or solved stationary law of the chain.
  const std::vector<double>& stationary() const { return stationary_; }
  bool stationary_supplied() const { return stationary_supplied_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  std::size_t sample_categorical(const std::vector<double>& cumulative, double u) const;
  std::size_t markov_forward(std::size_t state, double u) const;
  std::size_t markov_backward(std::size_t state, double u) const;
  std::size_t rotation_symbol(long double position) const;
  std::size_t iid_symbol(std::uint64_t trajectory, std::int64_t time) const;

 private:
  GregDriver() = default;

  DriverKind kind_ = DriverKind::IID;
  std::uint64_t seed_ = 0;
  Representation labels_;
  std::int64_t max_horizon_ = kDefaultMaxHorizon;

  std::vector<double> probabilities_;
  std::vector<double> cumulative_;

  Eigen::MatrixXd transition_;
  std::vector<std::vector<double>> forward_cdf_;
  std::vector<std::vector<double>> backward_cdf_;
  std::vector<double> stationary_;
  std::vector<double> stationary_cdf_;
  bool stationary_supplied_ = false;

  double alpha_ = 0.0;
  std::vector<double> breakpoints_;

  friend class TrajectoryCursor;
};

// Position on one trajectory of a driver. Single owner; copies are
// independent and replay the same sequence.
class TrajectoryCursor {
 public:
  TrajectoryCursor(std::shared_ptr<const GregDriver> driver, std::uint64_t trajectory);

  const GregDriver& driver() const { return *driver_; }
  std::uint64_t trajectory() const { return trajectory_; }
  std::int64_t time() const { return time_; }

  // Symbol of the base point at time() + offset, without moving.
  std::size_t symbol(std::int64_t offset = 0);

  // Symbol at the current time, then time -> time + 1.
  std::size_t advance();
  // time -> time - 1, then the symbol there.
  std::size_t retreat();

 private:
  std::size_t markov_state(std::int64_t t);

  std::shared_ptr<const GregDriver> driver_;
  std::uint64_t trajectory_;
  std::int64_t time_ = 0;

  // Markov states on the visited window [window_start_, window_start_ + size).
  std::deque<std::uint16_t> window_;
  std::int64_t window_start_ = 0;

  long double rotation_origin_ = 0.0L;
};

TrajectoryCursor sample_initial(std::shared_ptr<const GregDriver> driver, std::uint64_t trajectory);

GroupElement step_forward(TrajectoryCursor& cursor);
GroupElement step_backward(TrajectoryCursor& cursor);

// w_n(x) at the cursor's current point under the driver's own labels or a
// supplied representation. The cursor itself does not move.
GroupElement cocycle_product(const TrajectoryCursor& cursor, std::int64_t n);
GroupElement cocycle_product(const TrajectoryCursor& cursor, const Representation& rep, std::int64_t n);

// A driver paired with a representation of its labels.
class CocycleSource final : public IncrementSource {
 public:
  CocycleSource(std::shared_ptr<const GregDriver> driver, Representation rep);

  GroupModel model() const override { return rep_->model; }
  std::unique_ptr<IncrementStream> open(std::uint64_t seed, std::uint64_t trajectory) const override;
  std::string describe() const override;

  const GregDriver& driver() const { return *driver_; }
  const Representation& representation() const { return *rep_; }

 private:
  std::shared_ptr<const GregDriver> driver_;
  std::shared_ptr<const Representation> rep_;
};

class CocycleStream final : public IncrementStream {
 public:
  CocycleStream(TrajectoryCursor cursor, std::shared_ptr<const Representation> rep)
      : cursor_(std::move(cursor)), rep_(std::move(rep)) {}

  Increment next() override;
  bool reversible() const override { return true; }
  Increment previous() override;
  std::unique_ptr<IncrementStream> clone() const override { return std::make_unique<CocycleStream>(*this); }

  const TrajectoryCursor& cursor() const { return cursor_; }

 private:
  TrajectoryCursor cursor_;
  std::shared_ptr<const Representation> rep_;
};

}  // namespace lyaplab
