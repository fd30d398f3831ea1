#include "slngbm/rng.hpp"

#include <cmath>

namespace slngbm {

namespace {

// Philox4x32 round constants (Salmon et al. multipliers and Weyl keys).
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Ziggurat tables for the standard normal (Marsaglia & Tsang layout,
// 128 layers, R = 3.442619855899, V = 9.91256303526217e-3).
struct ZigguratTables {
  std::uint32_t kn[128];
  double wn[128];
  double fn[128];
  ZigguratTables() {
    const double m1 = 2147483648.0;
    const double vn = 9.91256303526217e-3;
    double dn = 3.442619855899;
    double tn = dn;
    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

constexpr double kZigguratR = 3.442619855899;

inline void philox_round(std::uint32_t ctr[4], std::uint32_t key0, std::uint32_t key1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t c1 = ctr[1];
  const std::uint32_t c3 = ctr[3];
  ctr[0] = hi1 ^ c1 ^ key0;
  ctr[1] = lo1;
  ctr[2] = hi0 ^ c3 ^ key1;
  ctr[3] = lo0;
}

}  // namespace

void RngStream::refill() {
  std::uint32_t ctr[4] = {
      static_cast<std::uint32_t>(counter_),
      static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_index_),
      static_cast<std::uint32_t>(stream_index_ >> 32),
  };
  std::uint32_t key0 = static_cast<std::uint32_t>(master_seed_);
  std::uint32_t key1 = static_cast<std::uint32_t>(master_seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, key0, key1);
    key0 += kWeyl0;
    key1 += kWeyl1;
  }
  block_[0] = ctr[0];
  block_[1] = ctr[1];
  block_[2] = ctr[2];
  block_[3] = ctr[3];
  block_pos_ = 0;
  ++counter_;
}

std::uint64_t RngStream::next_u64() {
  if (block_pos_ > 2) refill();
  const std::uint64_t lo = block_[block_pos_];
  const std::uint64_t hi = block_[block_pos_ + 1];
  block_pos_ += 2;
  return (hi << 32) | lo;
}

double RngStream::next_double() {
  // 53 bits, offset by half an ulp so the result is never 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const ZigguratTables& z = ziggurat();
  for (;;) {
    const std::uint64_t bits = next_u64();
    const std::int32_t hz = static_cast<std::int32_t>(bits >> 32);
    const unsigned iz = static_cast<unsigned>(hz) & 127u;
    if (static_cast<std::uint32_t>(hz < 0 ? -static_cast<std::int64_t>(hz) : hz) < z.kn[iz])
      return hz * z.wn[iz];
    if (iz == 0) {
      // Tail beyond R: exact exponential-rejection sampler.
      double x, y;
      do {
        x = -std::log(next_double()) / kZigguratR;
        y = -std::log(next_double());
      } while (y + y < x * x);
      return hz < 0 ? -(kZigguratR + x) : kZigguratR + x;
    }
    const double x = hz * z.wn[iz];
    if (z.fn[iz] + next_double() * (z.fn[iz - 1] - z.fn[iz]) < std::exp(-0.5 * x * x)) return x;
  }
}

}  // namespace slngbm
