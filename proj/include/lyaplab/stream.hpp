#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "lyaplab/liealg.hpp"

namespace lyaplab {

// One step of a group-valued cocycle: the increment applied at the current
// base point, the base symbol observed there, and how many base-system steps
// the increment spans (return time for induced streams, roof crossings for
// flow discretizations).
struct Increment {
  std::size_t symbol = 0;
  Mat g;
  std::uint64_t ticks = 1;
};

class IncrementStream {
 public:
  virtual ~IncrementStream() = default;

  // Increment at the current point, then advance one step.
  virtual Increment next() = 0;

  // Streams over a bi-infinite base system can also walk backwards:
  // previous() retreats one step and returns the increment found there.
  virtual bool reversible() const { return false; }
  virtual Increment previous() { throw InvalidArgument("stream cannot be walked backwards"); }

  virtual std::unique_ptr<IncrementStream> clone() const = 0;
};

// Anything the estimators can draw independent trajectories from. Streams
// may borrow from the source that opened them and must not outlive it.
class IncrementSource {
 public:
  virtual ~IncrementSource() = default;

  virtual GroupModel model() const = 0;
  virtual std::unique_ptr<IncrementStream> open(std::uint64_t seed, std::uint64_t trajectory) const = 0;
  virtual std::string describe() const = 0;
};

}  // namespace lyaplab
