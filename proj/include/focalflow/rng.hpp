#pragma once

#include <cstdint>
#include <string_view>

namespace focalflow {

// splitmix64 stream (Steele, Lea, Flood 2014). Chosen over std::mt19937 plus
// <random> distributions because the standard distributions are
// implementation-defined; this generator and the distribution code below are
// fully pinned, so any seed reproduces the same doubles on every platform.
//
// State is a single u64, which keeps checkpoint serialization trivial.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();

  // Uniform on [0, 1), 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller. No cached second value: two u64 draws per
  // sample, so the stream state never hides pending output.
  double normal();

  // Uniform integer in [0, bound). Multiply-shift mapping; bias is O(bound / 2^64).
  uint64_t below(uint64_t bound);

  // Independent child stream keyed by (current state, name, index). Does not
  // advance this stream; deriving the same name twice yields the same child.
  Rng derive(std::string_view name, uint64_t index = 0) const;

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

 private:
  uint64_t state_;
};

}  // namespace focalflow
