#include <cmath>
#include <limits>

#include "doctest.h"
#include "pgnn/adam.hpp"
#include "pgnn/error.hpp"

using namespace pgnn;

TEST_CASE("zero gradient leaves the parameters unchanged") {
  std::vector<double> w = {1.0, -2.0};
  std::vector<double> g = {0.0, 0.0};
  AdamState adam;
  std::vector<ParamRef> refs = {{"w", w, g}};
  adam.step(refs);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == -2.0);
  CHECK(adam.step_count() == 1);
}

TEST_CASE("one bias-corrected step with g = 1 moves by about the learning rate") {
  std::vector<double> w = {0.5};
  std::vector<double> g = {1.0};
  AdamState adam;
  std::vector<ParamRef> refs = {{"w", w, g}};
  adam.step(refs);
  // m = 0.1, v = 0.001, mhat = 1, vhat = 1: step = 1e-3 / (1 + 1e-7)
  CHECK(std::abs(w[0] - (0.5 - 1e-3 / (1.0 + 1e-7))) < 1e-16);
  const auto* m = adam.moments("w");
  REQUIRE(m != nullptr);
  CHECK(m->first[0] == doctest::Approx(0.1));
  CHECK(m->second[0] == doctest::Approx(0.001));
}

TEST_CASE("two steps follow the hand-evaluated recurrences") {
  std::vector<double> w = {0.0};
  std::vector<double> g = {2.0};
  AdamState adam(AdamOptions{0.01, 0.9, 0.999, 1e-7});
  std::vector<ParamRef> refs = {{"w", w, g}};
  adam.step(refs);
  g[0] = -1.0;
  adam.step(refs);
  double m = 0.0, v = 0.0, x = 0.0;
  for (int t = 1; t <= 2; ++t) {
    const double gt = t == 1 ? 2.0 : -1.0;
    m = 0.9 * m + 0.1 * gt;
    v = 0.999 * v + 0.001 * gt * gt;
    x -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-7);
  }
  CHECK(std::abs(w[0] - x) < 1e-15);
}

TEST_CASE("repeated runs are bit-identical") {
  auto run = [] {
    std::vector<double> w = {0.1, 0.2, 0.3};
    std::vector<double> g(3);
    AdamState adam;
    for (int t = 0; t < 50; ++t) {
      for (int k = 0; k < 3; ++k) g[k] = std::sin(t * 0.7 + k) * w[k] + 0.1;
      std::vector<ParamRef> refs = {{"w", w, g}};
      adam.step(refs);
    }
    return w;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite gradients name the parameter") {
  std::vector<double> w = {1.0};
  std::vector<double> g = {std::numeric_limits<double>::quiet_NaN()};
  AdamState adam;
  std::vector<ParamRef> refs = {{"net.layer0.weight", w, g}};
  try {
    adam.step(refs);
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    CHECK(e.where() == "net.layer0.weight");
  }
  CHECK(w[0] == 1.0);
}

TEST_CASE("a block that changes length is a shape error") {
  std::vector<double> w = {1.0, 2.0};
  std::vector<double> g = {0.0, 0.0};
  AdamState adam;
  std::vector<ParamRef> refs = {{"w", w, g}};
  adam.step(refs);
  std::vector<double> w3 = {1.0, 2.0, 3.0}, g3 = {0.0, 0.0, 0.0};
  std::vector<ParamRef> refs3 = {{"w", w3, g3}};
  CHECK_THROWS_AS(adam.step(refs3), ShapeError);
}

TEST_CASE("lr_scale multiplies the step") {
  std::vector<double> a = {0.0}, b = {0.0};
  std::vector<double> g = {1.0};
  AdamState adam;
  std::vector<ParamRef> refs = {{"a", a, g}, {"b", b, g, 10.0}};
  adam.step(refs);
  CHECK(std::abs(b[0] - 10.0 * a[0]) < 1e-18);
}
