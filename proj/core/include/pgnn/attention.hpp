#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pgnn/dense_net.hpp"

namespace pgnn {

class Rng;

// Multi-head sparsemax attention over the input features.
//
// Each feature k is embedded as a token t_k = x_k * key_scale_k + key_bias_k
// (length embed_dim). Head h scores the tokens with its learned query,
// z_hk = <query_h, t_k> / sqrt(embed_dim), and normalizes with sparsemax.
// The head scores are averaged into s, and the network input becomes
// x'_k = p * s_k * x_k, which is the identity when s is uniform.
struct AttentionSelector {
  std::size_t head_count = 3;
  std::size_t embed_dim = 4;
  Matrix query;      // head_count x embed_dim
  Matrix key_scale;  // p x embed_dim
  Matrix key_bias;   // p x embed_dim

  std::size_t feature_count() const noexcept { return key_scale.rows(); }
  void validate() const;

  bool operator==(const AttentionSelector&) const = default;
};

// Queries N(0, 1); token parameters N(0, init_scale^2), so the initial
// scores are close to uniform.
AttentionSelector make_attention(std::size_t feature_count, std::size_t head_count, Rng& rng,
                                 std::size_t embed_dim = 4, double init_scale = 1e-3);

struct AttentionGradient {
  Matrix query;
  Matrix key_scale;
  Matrix key_bias;

  static AttentionGradient zeros_like(const AttentionSelector& a);
};

void append_param_refs(AttentionSelector& a, const AttentionGradient& g, std::vector<ParamRef>& out);

struct AttentionForward {
  Matrix weighted;     // batch x p, the reweighted inputs fed to the network
  Matrix scores;       // batch x p, head-averaged sparsemax scores per row
  Matrix head_scores;  // (batch * head_count) x p
};

AttentionForward attention_forward(const AttentionSelector& a, const Matrix& x);

// Gradient of the loss with respect to the attention parameters, given
// d(loss)/d(weighted) from the network's backward pass.
AttentionGradient attention_backward(const AttentionSelector& a, const Matrix& x,
                                     const AttentionForward& fwd, const Matrix& d_weighted);

// Mean of the per-row scores over the minibatch; lies on the simplex.
std::vector<double> attention_scores(const AttentionSelector& a, const Matrix& x);

}  // namespace pgnn
