#include <cmath>
#include <numeric>

#include "doctest.h"
#include "pgnn/attention.hpp"
#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"

using namespace pgnn;

namespace {

AttentionSelector zero_selector(std::size_t p, std::size_t heads) {
  Rng rng(1);
  auto a = make_attention(p, heads, rng);
  for (auto& w : a.key_scale.flat()) w = 0.0;
  for (auto& w : a.key_bias.flat()) w = 0.0;
  return a;
}

}  // namespace

TEST_CASE("equal logits give uniform scores and leave the input unchanged") {
  auto a = zero_selector(5, 1);
  Matrix x(3, 5);
  Rng rng(2);
  for (auto& v : x.flat()) v = rng.normal();
  auto s = attention_scores(a, x);
  for (double v : s) CHECK(std::abs(v - 0.2) < 1e-15);
  auto f = attention_forward(a, x);
  for (std::size_t k = 0; k < x.flat().size(); ++k) CHECK(std::abs(f.weighted.flat()[k] - x.flat()[k]) < 1e-14);
}

TEST_CASE("a dominant logit gives a one-hot score") {
  auto a = zero_selector(4, 1);
  for (std::size_t d = 0; d < a.embed_dim; ++d) a.query(0, d) = 1.0;
  for (std::size_t d = 0; d < a.embed_dim; ++d) a.key_bias(2, d) = 5.0;
  Matrix x(2, 4, 0.5);
  auto s = attention_scores(a, x);
  CHECK(s == std::vector<double>{0.0, 0.0, 1.0, 0.0});
}

TEST_CASE("head and aggregate scores lie on the simplex") {
  Rng rng(3);
  auto a = make_attention(12, 3, rng, 4, 0.7);
  Matrix x(6, 12);
  for (auto& v : x.flat()) v = rng.normal();
  auto f = attention_forward(a, x);
  for (std::size_t r = 0; r < f.head_scores.rows(); ++r) {
    auto row = f.head_scores.row(r);
    double s = 0;
    for (double v : row) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  auto s = attention_scores(a, x);
  CHECK(std::abs(std::accumulate(s.begin(), s.end(), 0.0) - 1.0) < 1e-12);
  // aggregate is the head mean
  for (std::size_t k = 0; k < 12; ++k) {
    double m = 0;
    for (std::size_t h = 0; h < 3; ++h) m += f.head_scores(h, k);
    CHECK(std::abs(f.scores(0, k) - m / 3.0) < 1e-15);
  }
}

TEST_CASE("backward matches finite differences") {
  Rng rng(4);
  auto a = make_attention(5, 2, rng, 3, 0.8);
  Matrix x(4, 5);
  for (auto& v : x.flat()) v = rng.normal();
  Matrix c(4, 5);
  for (auto& v : c.flat()) v = rng.normal();
  auto loss = [&](const AttentionSelector& s) {
    auto f = attention_forward(s, x);
    double l = 0;
    for (std::size_t k = 0; k < c.flat().size(); ++k) l += c.flat()[k] * f.weighted.flat()[k];
    return l;
  };
  auto f = attention_forward(a, x);
  auto g = attention_backward(a, x, f, c);
  const double h = 1e-6;
  auto check_block = [&](Matrix AttentionSelector::*block, const Matrix& grad) {
    for (std::size_t k = 0; k < (a.*block).flat().size(); ++k) {
      auto p = a, m = a;
      (p.*block).flat()[k] += h;
      (m.*block).flat()[k] -= h;
      const double fd = (loss(p) - loss(m)) / (2 * h);
      CHECK(std::abs(fd - grad.flat()[k]) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
  };
  check_block(&AttentionSelector::query, g.query);
  check_block(&AttentionSelector::key_scale, g.key_scale);
  check_block(&AttentionSelector::key_bias, g.key_bias);
}

TEST_CASE("shape errors") {
  Rng rng(5);
  auto a = make_attention(5, 3, rng);
  Matrix x(2, 4);
  CHECK_THROWS_AS(attention_forward(a, x), ShapeError);
  CHECK_THROWS(make_attention(5, 0, rng));
}
