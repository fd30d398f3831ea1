#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "slngbm/rng.hpp"

using namespace slngbm;

TEST_CASE("streams are pure functions of (seed, stream, counter)") {
  RngStream a(123456789, 42);
  RngStream b(123456789, 42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // copies resume from the same state
  RngStream c = a;
  for (int i = 0; i < 100; ++i) CHECK(a.next_normal() == c.next_normal());
}

TEST_CASE("distinct stream indices decorrelate") {
  RngStream a(7, 0), b(7, 1), c(8, 0);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 256; ++i) {
    const std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++equal_ab;
    if (va == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniforms lie strictly inside (0,1)") {
  RngStream rng(321, 5);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.next_double();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("normal sampler: moments and tails at 2e6 draws") {
  RngStream rng(99, 3);
  const long n = 2000000;
  double m1 = 0, m2 = 0, m4 = 0, m6 = 0;
  long above_2 = 0, above_35 = 0;
  for (long i = 0; i < n; ++i) {
    const double x = rng.next_normal();
    const double x2 = x * x;
    m1 += x;
    m2 += x2;
    m4 += x2 * x2;
    m6 += x2 * x2 * x2;
    if (x > 2.0) ++above_2;
    if (x > 3.5) ++above_35;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  m6 /= n;
  const double rt_n = std::sqrt(static_cast<double>(n));
  CHECK(std::abs(m1 - 0.0) <= 5.0 * 1.0 / rt_n);
  CHECK(std::abs(m2 - 1.0) <= 5.0 * 1.4142 / rt_n);
  CHECK(std::abs(m4 - 3.0) <= 5.0 * 9.798 / rt_n);
  CHECK(std::abs(m6 - 15.0) <= 5.0 * 110.9 / rt_n);
  // exact tail masses of the standard normal
  const double p2 = 0.022750131948179195;
  const double p35 = 0.00023262907903552502;
  CHECK(std::abs(static_cast<double>(above_2) / n - p2) <= 5.0 * std::sqrt(p2 / n));
  CHECK(std::abs(static_cast<double>(above_35) / n - p35) <= 5.0 * std::sqrt(p35 / n));
}

TEST_CASE("counter field tracks consumed blocks") {
  RngStream rng(1, 2);
  CHECK(rng.counter() == 0);
  (void)rng.next_u64();
  CHECK(rng.counter() == 1);
  (void)rng.next_u64();  // second half of the same block
  CHECK(rng.counter() == 1);
  (void)rng.next_u64();
  CHECK(rng.counter() == 2);
}
