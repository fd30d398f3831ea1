#pragma once

#include <cstdint>

namespace slngbm {

/// Counter-based random stream (Philox4x32-10). A stream is a value: its
/// output is a pure function of (master_seed, stream_index, counter), so
/// trajectories are reproducible no matter how work is scheduled across
/// threads. Distinct (master_seed, stream_index) pairs give statistically
/// independent streams.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();

  /// Uniform double strictly inside (0, 1).
  double next_double();

  /// Standard normal via the ziggurat method.
  double next_normal();

 private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t counter_ = 0;

  std::uint32_t block_[4] = {0, 0, 0, 0};
  int block_pos_ = 4;  // lanes consumed from block_
};

}  // namespace slngbm
