#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgnn/dataset.hpp"
#include "pgnn/model.hpp"

namespace pgnn {

// c_i(lambda; y_{i+}) = (y+1/lambda) + lgamma(y+1/lambda) - (y+1/lambda) log(y+1/lambda).
double c_term(double lambda, std::int64_t y_plus);

// a_i(lambda; y_i) = q_i^{-1} { lambda^{-1} log lambda + lgamma(1/lambda) - c_i }.
double a_term(double lambda, std::int64_t y_plus, std::size_t q);

// Per-observation pieces of the online loss. The cluster-level terms are
// spread over the q_i observations of the cluster.
struct HLossTerms {
  double poisson_part = 0.0;  // -y (log mu^m + v) + e^v mu^m
  double prior_part = 0.0;    // -(v - e^v) / (q lambda)
  double correction = 0.0;    // a_i
  double total() const { return poisson_part + prior_part + correction; }
};

// q_i and y_{i+} come from `aggregates` (the training split), so validation
// rows are scored with their cluster's training aggregates.
std::vector<HLossTerms> loss_terms(const PgModel& model, const ClusteredDataset& data,
                                   std::span<const std::size_t> rows, const ClusterAggregates& aggregates);

struct LossResult {
  double value = 0.0;
  ModelGradient grad;
};

// Sum of the per-observation loss over `rows`, with gradients for every
// parameter of the model (v and log_lambda included; zero where the mode has
// no such term). The parameter-free sum of log y! is omitted. Throws
// TrainingError on a non-finite term, ConfigError when a row belongs to a
// cluster without training observations.
LossResult loss_batch(const PgModel& model, const ClusteredDataset& data, std::span<const std::size_t> rows,
                      const ClusterAggregates& aggregates, bool want_grad = true);

// Loss over all rows of `data` with its own aggregates.
LossResult loss_full(const PgModel& model, const ClusteredDataset& data, bool want_grad = true);
double loss_value(const PgModel& model, const ClusteredDataset& data, const ClusterAggregates& aggregates);

// h(theta, v) = sum_ij log f(y_ij | v_i) + sum_i log f(v_i) + sum_i c_i, with
// log y! included and the log-gamma density of v_i = log u_i (Jacobian
// included). Sums over clusters that have observations in `data`. Evaluated
// term by term, independently of loss_batch.
double h_total(const PgModel& model, const ClusteredDataset& data);

// sum of log y_ij! over the dataset.
double log_factorial_sum(const ClusteredDataset& data);

struct MarginalLogLik {
  double closed_form = 0.0;  // Poisson-gamma (negative binomial) mixture
  double quadrature = 0.0;   // adaptive Gauss-Kronrod over v in [-40, 40]
};

// Both evaluations of log integral exp{l_e(theta, v)} dv. Oracle use only.
MarginalLogLik marginal_loglik_both(const PgModel& model, const ClusteredDataset& data);

// Closed form, after asserting that the quadrature agrees within `tolerance`
// (OracleError otherwise).
double marginal_loglik(const PgModel& model, const ClusteredDataset& data, double tolerance = 1e-6);

// Per-cluster sum of mu^m over the rows of `data`.
std::vector<double> cluster_mu_sums(const PgModel& model, const ClusteredDataset& data);

}  // namespace pgnn
