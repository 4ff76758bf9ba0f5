#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>

namespace betamix {

// SplitMix64 stream keyed on (seed, stream id). Distinct replications get
// unrelated streams, so results do not depend on scheduling.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Index drawn from a probability vector (inverse CDF on the running sum).
  std::size_t discrete(std::span<const double> probs);

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
// claimed dynamically; callers store results by index for a deterministic merge.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace betamix
