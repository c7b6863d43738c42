#include "pgnn/metrics.hpp"

#include <cmath>

#include "pgnn/error.hpp"

namespace pgnn {

double rmspe_poisson(std::span<const double> y, std::span<const double> mu) {
  if (y.size() != mu.size()) throw ShapeError("rmspe: y and mu lengths differ");
  if (y.empty()) throw ShapeError("rmspe: empty input");
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(mu[k] > 0.0)) throw DomainError("rmspe: predictions must be positive");
    const double d = y[k] - mu[k];
    s += d * d / mu[k];
  }
  return std::sqrt(s / static_cast<double>(y.size()));
}

double rmspe_poisson(std::span<const std::int64_t> y, std::span<const double> mu) {
  std::vector<double> yd(y.begin(), y.end());
  return rmspe_poisson(std::span<const double>(yd), mu);
}

std::vector<double> pearson_residuals(std::span<const std::int64_t> y, std::span<const double> mu) {
  if (y.size() != mu.size()) throw ShapeError("pearson_residuals: length mismatch");
  std::vector<double> r(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(mu[k] > 0.0)) throw DomainError("pearson_residuals: predictions must be positive");
    r[k] = (static_cast<double>(y[k]) - mu[k]) / std::sqrt(mu[k]);
  }
  return r;
}

std::vector<double> scored_predictions(const PgModel& model, const ClusteredDataset& data) {
  const auto eta = linear_predictor(model, data.features());
  const bool conditional = has_cluster_effects(model.mode);
  std::vector<double> mu(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    const std::size_t i = data.cluster(r);
    const double v = conditional && i < model.v.size() ? model.v[i] : 0.0;
    mu[r] = std::exp(eta[r]) * std::exp(v);
  }
  return mu;
}

double test_rmspe(const PgModel& model, const ClusteredDataset& test) {
  return rmspe_poisson(test.counts(), scored_predictions(model, test));
}

void MetricReport::recompute() {
  mean = 0.0;
  sd = 0.0;
  if (rmspe.empty()) return;
  for (double r : rmspe) mean += r;
  mean /= static_cast<double>(rmspe.size());
  if (rmspe.size() > 1) {
    double ss = 0.0;
    for (double r : rmspe) ss += (r - mean) * (r - mean);
    sd = std::sqrt(ss / static_cast<double>(rmspe.size() - 1));
  }
}

}  // namespace pgnn
