#include "pgnn/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "pgnn/error.hpp"

namespace pgnn {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (x < 0.5) {
    // Gamma(x) = Gamma(x + 1) / x keeps the series argument away from the pole.
    return log_gamma(x + 1.0) - std::log(x);
  }
  const double z = x - 1.0;
  double series = kLanczos[0];
  for (std::size_t k = 1; k < kLanczos.size(); ++k) {
    series += kLanczos[k] / (z + static_cast<double>(k));
  }
  const double t = z + kLanczosG + 0.5;
  return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(series);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number asymptotic tail through x^-14.
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 * inv - tail;
}

double log_gamma_excess(double z) {
  require_positive(z, "log_gamma_excess");
  if (z < 10.0) {
    return log_gamma(z) - z * std::log(z) + z;
  }
  const double inv = 1.0 / z;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 -
             inv2 * (1.0 / 360.0 -
                     inv2 * (1.0 / 1260.0 -
                             inv2 * (1.0 / 1680.0 -
                                     inv2 * (1.0 / 1188.0 -
                                             inv2 * (691.0 / 360360.0 - inv2 / 156.0))))));
  return kHalfLog2Pi - 0.5 * std::log(z) + series;
}

double digamma_excess(double z) {
  require_positive(z, "digamma_excess");
  if (z < 10.0) {
    return digamma(z) - std::log(z);
  }
  const double inv = 1.0 / z;
  const double inv2 = inv * inv;
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return -0.5 * inv - tail;
}

double exp_minus_one_minus(double v) {
  if (std::abs(v) < 1e-3) {
    // Taylor series; std::expm1(v) - v still cancels to ~v^2 relative eps/v.
    return v * v * (0.5 + v * (1.0 / 6.0 + v * (1.0 / 24.0 + v / 120.0)));
  }
  return std::expm1(v) - v;
}

double log1p_minus(double d) {
  if (std::abs(d) < 1e-3) {
    return -d * d * (0.5 - d * (1.0 / 3.0 - d * (0.25 - d / 5.0)));
  }
  return std::log1p(d) - d;
}

}  // namespace pgnn
