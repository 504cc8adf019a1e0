#pragma once

// Counter-based pseudorandom streams (Philox4x32-10).
//
// A stream is identified by (seed, stream id). The generator is a pure
// function of (seed, stream id, counter), so any draw can be reproduced
// or computed out of order: distinct streams and distinct substreams
// never share counter blocks, which is what makes parallel execution
// deterministic regardless of worker count or interleaving.
//
// Layout per 128-bit block: counter words c0,c1 hold the 64-bit draw
// counter, c2,c3 hold the stream id; the Philox key is the 64-bit seed.

#include <cstdint>

#include <Eigen/Dense>

namespace anchored {

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  // Independent lane within this stream. Substream i owns counter range
  // [i * 2^32, (i+1) * 2^32): up to 2^32 blocks per lane and 2^32 lanes.
  // Used to parallelize loops over draws without losing determinism.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  // Standard normal via Box-Muller; pairs are generated together and the
  // spare is cached, so draw order is deterministic per stream.
  double normal();
  // Uniform integer in [0, bound); rejection sampling, no modulo bias.
  std::uint64_t uniform_below(std::uint64_t bound);
  // Vector of iid standard normals.
  Eigen::VectorXd gaussian_vector(Eigen::Index d);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  // Index of the next unconsumed 128-bit block.
  std::uint64_t block_counter() const { return counter_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
  std::uint32_t block_[4];
  int block_pos_;  // next unconsumed 32-bit word in block_, 4 = empty
  double cached_normal_;
  bool has_cached_normal_;
};

// One Philox4x32-10 block: encrypts `counter` under `key` into `out`.
// Exposed for tests against reference vectors.
void philox4x32_10(const std::uint32_t counter[4], const std::uint32_t key[2],
                   std::uint32_t out[4]);

}  // namespace anchored
