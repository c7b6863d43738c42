#include "pgnn/sparsemax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pgnn/error.hpp"

namespace pgnn {

std::vector<double> sparsemax(std::span<const double> z, double& tau) {
  const std::size_t K = z.size();
  if (K == 0) throw DomainError("sparsemax: empty input");
  for (double v : z) {
    if (!std::isfinite(v)) throw DomainError("sparsemax: non-finite input");
  }
  // Work relative to the maximum so that the result depends only on the
  // differences z_k - max z.
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> w(K);
  for (std::size_t k = 0; k < K; ++k) w[k] = z[k] - top;
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

  double cumulative = 0.0;
  double support_sum = 0.0;
  std::size_t support = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double wk = w[order[k]];
    cumulative += wk;
    if (1.0 + static_cast<double>(k + 1) * wk > cumulative) {
      support = k + 1;
      support_sum = cumulative;
    }
  }
  const double tau_w = (support_sum - 1.0) / static_cast<double>(support);
  tau = tau_w + top;
  std::vector<double> p(K, 0.0);
  for (std::size_t k = 0; k < support; ++k) {
    const std::size_t idx = order[k];
    p[idx] = std::max(w[idx] - tau_w, 0.0);
  }
  return p;
}

std::vector<double> sparsemax(std::span<const double> z) {
  double tau = 0.0;
  return sparsemax(z, tau);
}

std::vector<double> sparsemax_backward(std::span<const double> p, std::span<const double> grad_out) {
  if (p.size() != grad_out.size()) throw ShapeError("sparsemax_backward: length mismatch");
  double sum = 0.0;
  std::size_t support = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) {
      sum += grad_out[k];
      ++support;
    }
  }
  std::vector<double> g(p.size(), 0.0);
  if (support == 0) return g;
  const double mean = sum / static_cast<double>(support);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) g[k] = grad_out[k] - mean;
  }
  return g;
}

}  // namespace pgnn
