#include <cmath>
#include <set>

#include "doctest.h"
#include "pgnn/rng.hpp"

using namespace pgnn;

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42);
  for (int k = 0; k < 100; ++k) CHECK(a() == b());
  Rng c(43);
  CHECK(Rng(42)() != c());
}

TEST_CASE("split streams are deterministic and distinct") {
  Rng a(7), b(7);
  Rng a1 = a.split(), a2 = a.split();
  Rng b1 = b.split();
  CHECK(a1() == b1());
  CHECK(a1.seed() != a2.seed());
  // splitting does not advance the parent
  Rng p(7), q(7);
  (void)p.split();
  CHECK(p() == q());
}

TEST_CASE("derive is a pure function of seed and tag") {
  const Rng r(99);
  CHECK(r.derive(5).seed() == r.derive(5).seed());
  CHECK(r.derive(5).seed() != r.derive(6).seed());
}

TEST_CASE("distribution moments") {
  Rng r(1);
  const int n = 200000;
  double s = 0, ss = 0, g = 0, gg = 0, p = 0;
  for (int k = 0; k < n; ++k) {
    const double x = r.normal();
    s += x;
    ss += x * x;
    const double u = r.gamma(2.0, 2.0);
    g += u;
    gg += u * u;
    p += static_cast<double>(r.poisson(3.0));
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(ss / n - 1.0) < 0.02);
  CHECK(std::abs(g / n - 1.0) < 0.01);
  CHECK(std::abs(gg / n - (g / n) * (g / n) - 0.5) < 0.02);
  CHECK(std::abs(p / n - 3.0) < 0.02);
}

TEST_CASE("index stays in range") {
  Rng r(3);
  std::set<std::size_t> seen;
  for (int k = 0; k < 1000; ++k) {
    const auto i = r.index(5);
    CHECK(i < 5);
    seen.insert(i);
  }
  CHECK(seen.size() == 5);
}
