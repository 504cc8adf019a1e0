#include "anchored/rng.hpp"

#include <cmath>

namespace anchored {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t* lo,
                      std::uint32_t* hi) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  *lo = static_cast<std::uint32_t>(p);
  *hi = static_cast<std::uint32_t>(p >> 32);
}

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mul_hi_lo(kMulA, c[0], &lo0, &hi0);
  mul_hi_lo(kMulB, c[2], &lo1, &hi1);
  std::uint32_t r0 = hi1 ^ c[1] ^ k[0];
  std::uint32_t r1 = lo1;
  std::uint32_t r2 = hi0 ^ c[3] ^ k[1];
  std::uint32_t r3 = lo0;
  c[0] = r0;
  c[1] = r1;
  c[2] = r2;
  c[3] = r3;
}

}  // namespace

void philox4x32_10(const std::uint32_t counter[4], const std::uint32_t key[2],
                   std::uint32_t out[4]) {
  std::uint32_t c[4] = {counter[0], counter[1], counter[2], counter[3]};
  std::uint32_t k[2] = {key[0], key[1]};
  for (int round = 0; round < 10; ++round) {
    philox_round(c, k);
    if (round < 9) {
      k[0] += kWeylA;
      k[1] += kWeylB;
    }
  }
  out[0] = c[0];
  out[1] = c[1];
  out[2] = c[2];
  out[3] = c[3];
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed),
      stream_(stream),
      counter_(0),
      block_pos_(4),
      cached_normal_(0.0),
      has_cached_normal_(false) {}

RngStream RngStream::substream(std::uint64_t index) const {
  RngStream s(seed_, stream_);
  s.counter_ = index << 32;
  return s;
}

void RngStream::refill() {
  std::uint32_t ctr[4] = {
      static_cast<std::uint32_t>(counter_),
      static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32),
  };
  std::uint32_t key[2] = {
      static_cast<std::uint32_t>(seed_),
      static_cast<std::uint32_t>(seed_ >> 32),
  };
  philox4x32_10(ctr, key, block_);
  ++counter_;
  block_pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (block_pos_ > 2) refill();
  std::uint64_t lo = block_[block_pos_];
  std::uint64_t hi = block_[block_pos_ + 1];
  block_pos_ += 2;
  return lo | (hi << 32);
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
  // Accept only the top multiple of bound to avoid modulo bias.
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v >= threshold) return v % bound;
  }
}

Eigen::VectorXd RngStream::gaussian_vector(Eigen::Index d) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = normal();
  return v;
}

}  // namespace anchored
