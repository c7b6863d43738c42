#pragma once

#include <span>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"
#include "pgnn/model.hpp"

namespace pgnn {

// Method-of-moments estimate of lambda from predicted u_i and mu_{i+}:
// the positive root of lambda - S - S_w / lambda = 0 with
// S = mean (u_i - 1)^2 and S_w = mean (u_i - 1)^2 / mu_{i+}.
// Returns 0 when every u_i equals 1.
double mme(std::span<const double> u_hat, std::span<const double> mu_plus);

struct LambdaRecord {
  std::size_t epoch = 0;
  double lambda = 0.0;
  std::string source;  // "init", "mme", "gradient", "newton-refine"
};
using LambdaTrace = std::vector<LambdaRecord>;

void write_lambda_trace_csv(const LambdaTrace& trace, const std::string& path);

struct RefineResult {
  double lambda = 0.0;
  double gradient = 0.0;  // d h / d log lambda at the result
  std::size_t iterations = 0;
  bool at_floor = false;
};

// d/d(log lambda) of the profile h(theta, v~(lambda)) (equal to the
// marginal log-likelihood) over the clusters with rows in `data`, with the
// network held fixed.
double profile_lambda_gradient(const PgModel& model, const ClusteredDataset& data, double log_lambda);

// Profile value (up to terms free of lambda).
double profile_lambda_loglik(const PgModel& model, const ClusteredDataset& data, double log_lambda);

// Maximizes the profile h over log lambda by Newton's method guarded with a
// bisection bracket on [log 1e-6, log 1e4]. Returns the floor when the
// gradient there is already non-positive. Throws EstimationError after 100
// iterations without |gradient| < 1e-8.
RefineResult refine_lambda(const PgModel& model, const ClusteredDataset& data);

}  // namespace pgnn
