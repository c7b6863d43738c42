#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgnn/dataset.hpp"
#include "pgnn/model.hpp"

namespace pgnn {

// u_i = (y_{i+} + 1/lambda) / (mu_{i+} + 1/lambda), the conditional mean
// E(u_i | y_i) and the maximizer of the h-likelihood in v_i = log u_i.
std::vector<double> bup(double lambda, std::span<const std::int64_t> y_plus, std::span<const double> mu_plus);

// Sets v_i = log of the BUP for every cluster, with mu_{i+} from the current
// network on `data` (typically the training split).
void set_random_effects_to_bup(PgModel& model, const ClusteredDataset& data);

struct AdjustmentReport {
  double epsilon = 0.0;      // mean(u) - 1 before the adjustment
  double delta_h = 0.0;      // h gain, n (epsilon - log(1 + epsilon)) / lambda
  double beta0_shift = 0.0;  // log mean(u)
};

// Rescales u_i by 1 / mean(u) and moves the output bias by log mean(u); mu^c
// is unchanged and mean(u) = 1 afterwards. A no-op when |epsilon| < 1e-12.
// delta_h is reported for modes with a variance component (0 otherwise).
AdjustmentReport adjust(PgModel& model);

// n lambda^{-1} (epsilon - log(1 + epsilon)); non-negative, zero iff epsilon = 0.
double adjustment_gain(std::size_t n, double lambda, double epsilon);

}  // namespace pgnn
