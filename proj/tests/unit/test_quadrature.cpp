#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pgnn/error.hpp"
#include "pgnn/quadrature.hpp"

using namespace pgnn;

TEST_CASE("polynomials and smooth functions") {
  auto r = integrate_gk15([](double x) { return x * x * x - 2 * x; }, 0.0, 2.0);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 0.0) < 1e-13);
  auto s = integrate_gk15([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(std::abs(s.value - 2.0) < 1e-13);
}

TEST_CASE("narrow gaussian over a wide interval with breakpoints near the peak") {
  std::vector<double> breaks{3.0};
  for (double m = 1.0; m <= 64.0; m *= 2.0) {
    breaks.push_back(3.0 - 0.01 * m);
    breaks.push_back(3.0 + 0.01 * m);
  }
  auto r = integrate_gk15([](double x) { return std::exp(-0.5 * (x - 3) * (x - 3) / 1e-4); }, -40.0, 40.0, breaks);
  CHECK(r.converged);
  CHECK(std::abs(r.value / (std::sqrt(2 * std::numbers::pi) * 1e-2) - 1.0) < 1e-11);
}

TEST_CASE("log-space integral beyond double range") {
  // log int exp(1000 - x^2) dx over the real line = 1000 + log sqrt(pi)
  const double v = log_integrate_exp([](double x) { return 1000.0 - x * x; }, -40.0, 40.0, 1000.0, {0.0});
  CHECK(std::abs(v - (1000.0 + 0.5 * std::log(std::numbers::pi))) < 1e-11);
}

TEST_CASE("non-convergence is an oracle error") {
  QuadratureOptions opt;
  opt.max_intervals = 2;
  opt.rel_tol = 1e-15;
  CHECK_THROWS_AS(log_integrate_exp([](double x) { return std::log(std::abs(std::sin(50 * x)) + 1e-300); },
                                    0.0, 10.0, 0.0, {}, opt),
                  OracleError);
}
