#include "pgnn/hlik.hpp"

#include <cmath>
#include <string>

#include "pgnn/error.hpp"
#include "pgnn/quadrature.hpp"
#include "pgnn/special.hpp"

namespace pgnn {

namespace {

void require_lambda(double lambda, const char* fn) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError(std::string(fn) + ": lambda must be positive, got " + std::to_string(lambda));
  }
}

Matrix gather_rows(const ClusteredDataset& data, std::span<const std::size_t> rows) {
  Matrix x(rows.size(), data.feature_count());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const auto src = data.x(rows[b]);
    std::copy(src.begin(), src.end(), x.row(b).begin());
  }
  return x;
}

void check_finite(double value, const char* term, std::size_t row) {
  if (!std::isfinite(value)) {
    throw TrainingError("non-finite loss term", std::string(term) + " at row " + std::to_string(row));
  }
}

}  // namespace

double c_term(double lambda, std::int64_t y_plus) {
  require_lambda(lambda, "c_term");
  if (y_plus < 0) throw DomainError("c_term: y_plus must be non-negative");
  return log_gamma_excess(static_cast<double>(y_plus) + 1.0 / lambda);
}

double a_term(double lambda, std::int64_t y_plus, std::size_t q) {
  require_lambda(lambda, "a_term");
  if (q == 0) throw DomainError("a_term: cluster size must be at least 1");
  const double k = 1.0 / lambda;
  // lambda^{-1} log lambda + lgamma(1/lambda) = excess(k) - k.
  return (log_gamma_excess(k) - k - c_term(lambda, y_plus)) / static_cast<double>(q);
}

std::vector<HLossTerms> loss_terms(const PgModel& model, const ClusteredDataset& data,
                                   std::span<const std::size_t> rows, const ClusterAggregates& aggregates) {
  const Matrix x = gather_rows(data, rows);
  const auto fwd = model_forward(model, x);
  const bool effects = has_cluster_effects(model.mode);
  const bool prior = has_variance_component(model.mode);
  const double lambda = model.lambda();
  std::vector<HLossTerms> terms(rows.size());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const std::size_t r = rows[b];
    const std::size_t i = data.cluster(r);
    const double y = static_cast<double>(data.y(r));
    const double v = effects ? model.v[i] : 0.0;
    terms[b].poisson_part = -y * (fwd.eta[b] + v) + std::exp(v + fwd.eta[b]);
    if (prior) {
      const std::size_t q = aggregates.sizes[i];
      if (q == 0) throw ConfigError("loss_terms: cluster '" + data.cluster_labels()[i] + "' has no training rows");
      terms[b].prior_part = -(v - std::exp(v)) / (static_cast<double>(q) * lambda);
      terms[b].correction = a_term(lambda, aggregates.count_sums[i], q);
    }
  }
  return terms;
}

LossResult loss_batch(const PgModel& model, const ClusteredDataset& data, std::span<const std::size_t> rows,
                      const ClusterAggregates& aggregates, bool want_grad) {
  if (data.feature_count() != model.input_width()) throw ShapeError("loss_batch: feature width mismatch");
  if (aggregates.cluster_count() != model.cluster_count() || data.cluster_count() != model.cluster_count()) {
    throw ShapeError("loss_batch: cluster index space does not match the model");
  }
  LossResult result;
  if (want_grad) result.grad = ModelGradient::zeros_like(model);
  if (rows.empty()) return result;

  const Matrix x = gather_rows(data, rows);
  const auto fwd = model_forward(model, x);
  const bool effects = has_cluster_effects(model.mode);
  const bool prior = has_variance_component(model.mode);
  const double k = 1.0 / model.lambda();
  const double excess_k = prior ? log_gamma_excess(k) : 0.0;
  const double dexcess_k = prior ? digamma_excess(k) : 0.0;

  std::vector<double> d_eta(rows.size());
  double total = 0.0;
  double d_log_lambda = 0.0;
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const std::size_t r = rows[b];
    const std::size_t i = data.cluster(r);
    const double y = static_cast<double>(data.y(r));
    const double eta = fwd.eta[b];
    const double v = effects ? model.v[i] : 0.0;
    const double mu_c = std::exp(eta + v);
    const double poisson = -y * (eta + v) + mu_c;
    check_finite(poisson, "poisson_part", r);
    total += poisson;
    d_eta[b] = mu_c - y;
    if (want_grad && effects) result.grad.v[i] += mu_c - y;
    if (prior) {
      const std::size_t q = aggregates.sizes[i];
      if (q == 0) throw ConfigError("loss_batch: cluster '" + data.cluster_labels()[i] + "' has no training rows");
      const double inv_q = 1.0 / static_cast<double>(q);
      const double z = static_cast<double>(aggregates.count_sums[i]) + k;
      // prior_part + a_i, regrouped as k (e^v - 1 - v) + excess(k) - excess(y+ + k).
      const double cluster_term = (k * exp_minus_one_minus(v) + excess_k - log_gamma_excess(z)) * inv_q;
      check_finite(cluster_term, "prior_part+a_i", r);
      total += cluster_term;
      if (want_grad) {
        result.grad.v[i] += k * std::expm1(v) * inv_q;
        d_log_lambda -= k * (exp_minus_one_minus(v) + dexcess_k - digamma_excess(z)) * inv_q;
      }
    }
  }
  result.value = total;
  if (want_grad) {
    model_backward(model, fwd, d_eta, result.grad);
    result.grad.log_lambda = d_log_lambda;
  }
  return result;
}

LossResult loss_full(const PgModel& model, const ClusteredDataset& data, bool want_grad) {
  std::vector<std::size_t> rows(data.size());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  return loss_batch(model, data, rows, data.aggregates(), want_grad);
}

double loss_value(const PgModel& model, const ClusteredDataset& data, const ClusterAggregates& aggregates) {
  std::vector<std::size_t> rows(data.size());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  return loss_batch(model, data, rows, aggregates, false).value;
}

double log_factorial_sum(const ClusteredDataset& data) {
  double s = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) s += log_gamma(static_cast<double>(data.y(r)) + 1.0);
  return s;
}

double h_total(const PgModel& model, const ClusteredDataset& data) {
  if (data.cluster_count() != model.cluster_count()) throw ShapeError("h_total: cluster space mismatch");
  const bool effects = has_cluster_effects(model.mode);
  const auto eta = linear_predictor(model, data.features());
  double h = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const double v = effects ? model.v[data.cluster(r)] : 0.0;
    const double log_mu = eta[r] + v;
    const double y = static_cast<double>(data.y(r));
    h += y * log_mu - std::exp(log_mu) - log_gamma(y + 1.0);
  }
  if (!has_variance_component(model.mode)) return h;
  const double lambda = model.lambda();
  const double k = 1.0 / lambda;
  for (std::size_t i = 0; i < data.cluster_count(); ++i) {
    if (data.cluster_size(i) == 0) continue;
    const double v = model.v[i];
    // u ~ Gamma(k, rate k), v = log u: log f(v) = log f_u(e^v) + v.
    h += k * std::log(k) - log_gamma(k) + k * v - k * std::exp(v);
    const double z = static_cast<double>(data.cluster_count_sum(i)) + k;
    h += z + log_gamma(z) - z * std::log(z);
  }
  return h;
}

std::vector<double> cluster_mu_sums(const PgModel& model, const ClusteredDataset& data) {
  const auto eta = linear_predictor(model, data.features());
  std::vector<double> mu(data.cluster_count(), 0.0);
  for (std::size_t r = 0; r < data.size(); ++r) mu[data.cluster(r)] += std::exp(eta[r]);
  return mu;
}

MarginalLogLik marginal_loglik_both(const PgModel& model, const ClusteredDataset& data) {
  if (data.cluster_count() != model.cluster_count()) throw ShapeError("marginal_loglik: cluster space mismatch");
  const auto eta = linear_predictor(model, data.features());
  MarginalLogLik out;
  // Observation-level constants shared by both routes.
  std::vector<double> mu_plus(data.cluster_count(), 0.0);
  double constant = 0.0;
  const bool effects = has_cluster_effects(model.mode);
  const bool prior = has_variance_component(model.mode);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const double y = static_cast<double>(data.y(r));
    const std::size_t i = data.cluster(r);
    if (prior) {
      constant += y * eta[r] - log_gamma(y + 1.0);
      mu_plus[i] += std::exp(eta[r]);
    } else {
      const double log_mu = eta[r] + (effects ? model.v[i] : 0.0);
      constant += y * log_mu - std::exp(log_mu) - log_gamma(y + 1.0);
    }
  }
  out.closed_form = constant;
  out.quadrature = constant;
  if (!prior) return out;

  const double k = 1.0 / model.lambda();
  const double prior_const = k * std::log(k) - log_gamma(k);
  for (std::size_t i = 0; i < data.cluster_count(); ++i) {
    if (data.cluster_size(i) == 0) continue;
    const double yp = static_cast<double>(data.cluster_count_sum(i));
    const double mp = mu_plus[i];
    const double z = yp + k;
    // k log k - lgamma(k) + lgamma(z) - z log(mp + k), regrouped around the
    // ratio z / (mp + k) to avoid cancellation when k is large.
    out.closed_form += log_gamma_excess(z) - log_gamma_excess(k) - yp + z * std::log1p((yp - mp) / (mp + k));

    // z v - (mp + k) e^v around its mode: z (mode - 1) - z (e^w - 1 - w), w = v - mode.
    const double mode = std::log(z / (mp + k));
    auto log_integrand = [&](double v) { return -z * exp_minus_one_minus(v - mode); };
    const double sigma = 1.0 / std::sqrt(z);
    std::vector<double> breaks{mode};
    for (double m = 1.0; m <= 64.0; m *= 2.0) {
      breaks.push_back(mode - m * sigma);
      breaks.push_back(mode + m * sigma);
    }
    out.quadrature += prior_const + z * (mode - 1.0) + log_integrate_exp(log_integrand, -40.0, 40.0, 0.0, breaks);
  }
  return out;
}

double marginal_loglik(const PgModel& model, const ClusteredDataset& data, double tolerance) {
  const auto both = marginal_loglik_both(model, data);
  if (!(std::abs(both.closed_form - both.quadrature) <= tolerance)) {
    throw OracleError("marginal_loglik: closed form " + std::to_string(both.closed_form) +
                      " and quadrature " + std::to_string(both.quadrature) + " disagree");
  }
  return both.closed_form;
}

}  // namespace pgnn
