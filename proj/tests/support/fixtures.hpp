#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"
#include "pgnn/model.hpp"
#include "pgnn/rng.hpp"

namespace fixture {

// n clusters of q rows with p standard-normal features and counts drawn
// around an overdispersed mean.
inline pgnn::ClusteredDataset tiny_dataset(std::size_t n, std::size_t q, std::size_t p, std::uint64_t seed) {
  pgnn::Rng rng(seed);
  pgnn::Matrix x(n * q, p);
  std::vector<std::size_t> cl(n * q);
  std::vector<std::int64_t> y(n * q);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.gamma(2.0, 2.0);
    for (std::size_t j = 0; j < q; ++j) {
      const std::size_t r = i * q + j;
      cl[r] = i;
      double eta = 0.3;
      for (std::size_t k = 0; k < p; ++k) {
        x(r, k) = rng.normal();
        eta += 0.2 * x(r, k) / static_cast<double>(k + 1);
      }
      y[r] = rng.poisson(u * std::exp(eta));
    }
  }
  return pgnn::ClusteredDataset(std::move(x), std::move(cl), std::move(y), n);
}

// Model with random weights, random v and the given lambda.
inline pgnn::PgModel random_model(pgnn::ModelMode mode, const pgnn::ClusteredDataset& ds, double lambda,
                                  std::uint64_t seed, std::vector<std::size_t> hidden = {4, 3},
                                  std::size_t attention_heads = 0) {
  pgnn::Rng rng(seed);
  pgnn::ModelSpec spec;
  spec.mode = mode;
  spec.input_width = ds.feature_count();
  spec.hidden = std::move(hidden);
  spec.attention_heads = attention_heads;
  auto m = pgnn::make_model(spec, ds.cluster_labels(), rng);
  for (auto& layer : m.net.layers) {
    for (auto& b : layer.bias) b = rng.uniform(-0.3, 0.3);
  }
  if (m.attention) {
    for (auto& w : m.attention->key_scale.flat()) w = rng.normal(0.0, 0.5);
    for (auto& w : m.attention->key_bias.flat()) w = rng.normal(0.0, 0.5);
  }
  if (pgnn::has_cluster_effects(mode)) {
    for (auto& v : m.v) v = rng.uniform(-0.5, 0.5);
  }
  m.set_lambda(lambda);
  return m;
}

}  // namespace fixture
