#include "symm/rng.hpp"

#include <doctest.h>

#include <cmath>

using symm::Rng;

TEST_CASE("rng is reproducible and streams differ") {
  Rng a(42), b(42), c(42, 1);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("rng draws stay in range and look uniform") {
  Rng r(1);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    CHECK(r.below(7) < 7);
    const double g = r.normal();
    sum_sq += g * g;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("split streams are deterministic") {
  Rng a(9), b(9);
  auto sa = a.split(3), sb = b.split(3);
  CHECK(sa.next_u64() == sb.next_u64());
}
