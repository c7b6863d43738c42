#include "pgnn/rng.hpp"

#include "pgnn/error.hpp"

namespace pgnn {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split() { return derive(++splits_); }

Rng Rng::derive(std::uint64_t tag) const {
  return Rng(splitmix64(seed_ ^ splitmix64(tag + 0x5851f42d4c957f2dULL)));
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(engine_);
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw DomainError("Rng::gamma: shape and rate must be positive");
  }
  return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw DomainError("Rng::poisson: mean must be non-negative");
  if (mean == 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(engine_);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw DomainError("Rng::index: empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

}  // namespace pgnn
