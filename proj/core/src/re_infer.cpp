#include "pgnn/re_infer.hpp"

#include <cmath>
#include <string>

#include "pgnn/error.hpp"
#include "pgnn/hlik.hpp"
#include "pgnn/special.hpp"

namespace pgnn {

std::vector<double> bup(double lambda, std::span<const std::int64_t> y_plus, std::span<const double> mu_plus) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("bup: lambda must be positive");
  if (y_plus.size() != mu_plus.size()) throw ShapeError("bup: y_plus and mu_plus lengths differ");
  const double k = 1.0 / lambda;
  std::vector<double> u(y_plus.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(mu_plus[i] >= 0.0)) throw DomainError("bup: mu_plus must be non-negative");
    // (y + k) / (mu + k) = 1 + (y - mu) / (mu + k)
    u[i] = 1.0 + (static_cast<double>(y_plus[i]) - mu_plus[i]) / (mu_plus[i] + k);
  }
  return u;
}

void set_random_effects_to_bup(PgModel& model, const ClusteredDataset& data) {
  if (!has_cluster_effects(model.mode)) return;
  const auto mu = cluster_mu_sums(model, data);
  const auto u = bup(model.lambda(), data.aggregates().count_sums, mu);
  for (std::size_t i = 0; i < u.size(); ++i) model.v[i] = std::log(u[i]);
}

double adjustment_gain(std::size_t n, double lambda, double epsilon) {
  if (!(lambda > 0.0)) throw DomainError("adjustment_gain: lambda must be positive");
  if (!(epsilon > -1.0)) throw DomainError("adjustment_gain: epsilon must exceed -1");
  return -static_cast<double>(n) / lambda * log1p_minus(epsilon);
}

AdjustmentReport adjust(PgModel& model) {
  AdjustmentReport report;
  const std::size_t n = model.v.size();
  if (n == 0) throw StateError("adjust: model has no clusters");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::exp(model.v[i]);
    if (!(u > 0.0) || !std::isfinite(u)) {
      throw StateError("adjust: u_hat for cluster " + std::to_string(i) + " is not positive");
    }
    sum += u;
  }
  const double mean = sum / static_cast<double>(n);
  report.epsilon = mean - 1.0;
  if (std::abs(report.epsilon) < 1e-12) {
    report.epsilon = 0.0;
    return report;
  }
  const double shift = std::log(mean);
  for (double& v : model.v) v -= shift;
  model.net.output_bias() += shift;
  report.beta0_shift = shift;
  if (has_variance_component(model.mode)) report.delta_h = adjustment_gain(n, model.lambda(), report.epsilon);
  return report;
}

}  // namespace pgnn
