#pragma once

#include <cstdint>
#include <random>

namespace pgnn {

// Seeded 64-bit generator. Child streams from split() are deterministic
// functions of (seed, split index) and do not advance this stream.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed = 0);

  Rng split();
  // Child stream keyed by an explicit tag instead of the split counter.
  Rng derive(std::uint64_t tag) const;

  std::uint64_t seed() const noexcept { return seed_; }

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal(double mean = 0.0, double stddev = 1.0);
  // Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate);
  std::int64_t poisson(double mean);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t splits_ = 0;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pgnn
