#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"
#include "pgnn/model.hpp"

namespace pgnn {

// sqrt(N^{-1} sum (y - mu)^2 / mu), the Poisson Pearson error (phi = 1,
// V(mu) = mu). Throws DomainError for mu <= 0.
double rmspe_poisson(std::span<const double> y, std::span<const double> mu);
double rmspe_poisson(std::span<const std::int64_t> y, std::span<const double> mu);

// Pearson residuals (y - mu) / sqrt(mu).
std::vector<double> pearson_residuals(std::span<const std::int64_t> y, std::span<const double> mu);

// Marginal modes (p-glm, p-nn) predict mu^m; the others predict mu^c.
std::vector<double> scored_predictions(const PgModel& model, const ClusteredDataset& data);
double test_rmspe(const PgModel& model, const ClusteredDataset& test);

struct MetricReport {
  std::string model;
  std::string scenario;
  std::vector<double> rmspe;  // per replication, failed ones excluded
  std::size_t failures = 0;
  double mean = 0.0;
  double sd = 0.0;            // sample standard deviation

  void recompute();
};

}  // namespace pgnn
