#pragma once

// Counter-based randomness: every draw is a pure function of its key, so
// trajectories can be walked in either direction without stored state.

#include <cstdint>

namespace lyaplab {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct CounterKey {
  std::uint64_t seed = 0;
  std::uint64_t trajectory = 0;
  std::int64_t time = 0;
  std::uint64_t stream = 0;
};

constexpr std::uint64_t counter_bits(const CounterKey& key) {
  std::uint64_t h = splitmix64(key.seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ key.trajectory);
  h = splitmix64(h ^ static_cast<std::uint64_t>(key.time));
  return splitmix64(h ^ (key.stream * 0xd1b54a32d192ed03ULL));
}

// Uniform in [0, 1) with 53 random bits.
constexpr double counter_uniform(const CounterKey& key) {
  return static_cast<double>(counter_bits(key) >> 11) * 0x1.0p-53;
}

}  // namespace lyaplab
