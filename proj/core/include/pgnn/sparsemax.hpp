#pragma once

#include <span>
#include <vector>

namespace pgnn {

// Euclidean projection of z onto the probability simplex,
// out_k = max(z_k - tau(z), 0). Ties at the support boundary resolve in
// index order.
std::vector<double> sparsemax(std::span<const double> z);

// Same, also returning the threshold tau.
std::vector<double> sparsemax(std::span<const double> z, double& tau);

// Vector-Jacobian product at output p: (I - 1 1^T / |S|) restricted to the
// support S = {k : p_k > 0}, zero elsewhere.
std::vector<double> sparsemax_backward(std::span<const double> p, std::span<const double> grad_out);

}  // namespace pgnn
