#include "pgnn/attention.hpp"

#include <cmath>

#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"
#include "pgnn/sparsemax.hpp"

namespace pgnn {

void AttentionSelector::validate() const {
  if (head_count == 0 || embed_dim == 0) throw ShapeError("attention: empty head or embedding");
  if (query.rows() != head_count || query.cols() != embed_dim) throw ShapeError("attention: query shape");
  if (key_scale.cols() != embed_dim || key_bias.cols() != embed_dim ||
      key_bias.rows() != key_scale.rows() || key_scale.rows() == 0) {
    throw ShapeError("attention: key shape");
  }
  for (const Matrix* m : {&query, &key_scale, &key_bias}) {
    for (double v : m->flat()) {
      if (!std::isfinite(v)) throw DomainError("attention: non-finite parameter");
    }
  }
}

AttentionSelector make_attention(std::size_t feature_count, std::size_t head_count, Rng& rng,
                                 std::size_t embed_dim, double init_scale) {
  AttentionSelector a;
  a.head_count = head_count;
  a.embed_dim = embed_dim;
  a.query = Matrix(head_count, embed_dim);
  a.key_scale = Matrix(feature_count, embed_dim);
  a.key_bias = Matrix(feature_count, embed_dim);
  for (double& v : a.query.flat()) v = rng.normal();
  for (double& v : a.key_scale.flat()) v = init_scale * rng.normal();
  for (double& v : a.key_bias.flat()) v = init_scale * rng.normal();
  a.validate();
  return a;
}

AttentionGradient AttentionGradient::zeros_like(const AttentionSelector& a) {
  return {Matrix(a.query.rows(), a.query.cols()), Matrix(a.key_scale.rows(), a.key_scale.cols()),
          Matrix(a.key_bias.rows(), a.key_bias.cols())};
}

void append_param_refs(AttentionSelector& a, const AttentionGradient& g, std::vector<ParamRef>& out) {
  out.push_back({"attention.query", a.query.flat(), g.query.flat()});
  out.push_back({"attention.key_scale", a.key_scale.flat(), g.key_scale.flat()});
  out.push_back({"attention.key_bias", a.key_bias.flat(), g.key_bias.flat()});
}

AttentionForward attention_forward(const AttentionSelector& a, const Matrix& x) {
  const std::size_t p = a.feature_count();
  if (x.cols() != p) throw ShapeError("attention_forward: input width mismatch");
  const std::size_t H = a.head_count;
  const std::size_t d = a.embed_dim;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double inv_heads = 1.0 / static_cast<double>(H);
  const double width = static_cast<double>(p);

  AttentionForward fwd;
  fwd.weighted = Matrix(x.rows(), p);
  fwd.scores = Matrix(x.rows(), p);
  fwd.head_scores = Matrix(x.rows() * H, p);
  std::vector<double> logits(p);
  std::vector<double> token(d);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto xb = x.row(b);
    auto sb = fwd.scores.row(b);
    for (std::size_t h = 0; h < H; ++h) {
      const auto qh = a.query.row(h);
      for (std::size_t k = 0; k < p; ++k) {
        const auto e = a.key_scale.row(k);
        const auto c = a.key_bias.row(k);
        double z = 0.0;
        for (std::size_t m = 0; m < d; ++m) z += qh[m] * (xb[k] * e[m] + c[m]);
        logits[k] = z * inv_sqrt_d;
      }
      const auto s = sparsemax(logits);
      auto hs = fwd.head_scores.row(b * H + h);
      for (std::size_t k = 0; k < p; ++k) {
        hs[k] = s[k];
        sb[k] += s[k] * inv_heads;
      }
    }
    auto wb = fwd.weighted.row(b);
    for (std::size_t k = 0; k < p; ++k) wb[k] = width * sb[k] * xb[k];
  }
  return fwd;
}

AttentionGradient attention_backward(const AttentionSelector& a, const Matrix& x,
                                     const AttentionForward& fwd, const Matrix& d_weighted) {
  const std::size_t p = a.feature_count();
  const std::size_t H = a.head_count;
  const std::size_t d = a.embed_dim;
  if (d_weighted.rows() != x.rows() || d_weighted.cols() != p) {
    throw ShapeError("attention_backward: gradient shape mismatch");
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double inv_heads = 1.0 / static_cast<double>(H);
  const double width = static_cast<double>(p);

  AttentionGradient g = AttentionGradient::zeros_like(a);
  std::vector<double> d_score(p);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto xb = x.row(b);
    const auto dw = d_weighted.row(b);
    for (std::size_t k = 0; k < p; ++k) d_score[k] = dw[k] * width * xb[k] * inv_heads;
    for (std::size_t h = 0; h < H; ++h) {
      const auto dz = sparsemax_backward(fwd.head_scores.row(b * H + h), d_score);
      const auto qh = a.query.row(h);
      auto gq = g.query.row(h);
      for (std::size_t k = 0; k < p; ++k) {
        if (dz[k] == 0.0) continue;
        const double dzk = dz[k] * inv_sqrt_d;
        const auto e = a.key_scale.row(k);
        const auto c = a.key_bias.row(k);
        auto ge = g.key_scale.row(k);
        auto gc = g.key_bias.row(k);
        for (std::size_t m = 0; m < d; ++m) {
          gq[m] += dzk * (xb[k] * e[m] + c[m]);
          const double dt = dzk * qh[m];
          ge[m] += dt * xb[k];
          gc[m] += dt;
        }
      }
    }
  }
  return g;
}

std::vector<double> attention_scores(const AttentionSelector& a, const Matrix& x) {
  const auto fwd = attention_forward(a, x);
  std::vector<double> s(a.feature_count(), 0.0);
  if (x.rows() == 0) {
    // No data: data-free tokens (x = 0).
    Matrix zero(1, a.feature_count());
    return attention_scores(a, zero);
  }
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto sb = fwd.scores.row(b);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += sb[k];
  }
  for (double& v : s) v /= static_cast<double>(x.rows());
  return s;
}

}  // namespace pgnn
