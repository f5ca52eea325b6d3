#ifndef NORMEX_RNG_HPP
#define NORMEX_RNG_HPP

#include <cstdint>

namespace normex {

// Counter-based uniform stream. Every value is a pure function of
// (seed, stream, counter), so sub-streams can be handed to worker threads
// in any order and the output stays identical. The mixing function is the
// SplitMix64 finalizer evaluated at successive counter positions.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform draw strictly inside (0, 1).
  double uniform();

  /// Standard normal via Box-Muller; pairs are cached per stream.
  double normal();

  /// Exponential(1).
  double exponential();

  /// Gamma(shape, 1) for any shape > 0 (Marsaglia-Tsang squeeze).
  double gamma(double shape);

  /// Uniform integer in [0, bound) by rejection (bound >= 1).
  std::uint64_t uniform_index(std::uint64_t bound);

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Derives a well-separated stream id from a purpose tag and an item index
/// (e.g. a row number), so independent tasks never share a stream.
std::uint64_t substream(std::uint64_t tag, std::uint64_t index);

}  // namespace normex

#endif  // NORMEX_RNG_HPP
