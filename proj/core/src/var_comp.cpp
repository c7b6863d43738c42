#include "pgnn/var_comp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pgnn/csv.hpp"
#include "pgnn/error.hpp"
#include "pgnn/hlik.hpp"
#include "pgnn/special.hpp"

namespace pgnn {

double mme(std::span<const double> u_hat, std::span<const double> mu_plus) {
  const std::size_t n = u_hat.size();
  if (n < 2) throw DomainError("mme: at least two clusters required");
  if (mu_plus.size() != n) throw ShapeError("mme: u_hat and mu_plus lengths differ");
  double ss = 0.0;
  double ss_weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mu_plus[i] > 0.0)) throw DomainError("mme: mu_plus must be positive");
    const double d2 = (u_hat[i] - 1.0) * (u_hat[i] - 1.0);
    ss += d2;
    ss_weighted += d2 / mu_plus[i];
  }
  if (ss == 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  return (ss / nd) * (0.5 + std::sqrt(0.25 + nd * ss_weighted / (ss * ss)));
}

void write_lambda_trace_csv(const LambdaTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_lambda_trace_csv: cannot open '" + path + "'");
  out << "epoch,lambda,source\n";
  for (const auto& r : trace) out << r.epoch << ',' << format_double(r.lambda) << ',' << r.source << '\n';
}

namespace {

struct ClusterSums {
  std::vector<double> y_plus;
  std::vector<double> mu_plus;
};

ClusterSums cluster_sums(const PgModel& model, const ClusteredDataset& data) {
  ClusterSums s;
  const auto mu = cluster_mu_sums(model, data);
  for (std::size_t i = 0; i < data.cluster_count(); ++i) {
    if (data.cluster_size(i) == 0) continue;
    s.y_plus.push_back(static_cast<double>(data.cluster_count_sum(i)));
    s.mu_plus.push_back(mu[i]);
  }
  return s;
}

double gradient_from_sums(const ClusterSums& s, double log_lambda) {
  const double k = std::exp(-log_lambda);
  const double dk = digamma_excess(k);
  double g = 0.0;
  for (std::size_t i = 0; i < s.y_plus.size(); ++i) {
    const double z = s.y_plus[i] + k;
    const double delta = (s.y_plus[i] - s.mu_plus[i]) / (s.mu_plus[i] + k);
    g += digamma_excess(z) - dk + log1p_minus(delta);
  }
  return -k * g;
}

}  // namespace

double profile_lambda_gradient(const PgModel& model, const ClusteredDataset& data, double log_lambda) {
  return gradient_from_sums(cluster_sums(model, data), log_lambda);
}

double profile_lambda_loglik(const PgModel& model, const ClusteredDataset& data, double log_lambda) {
  const auto s = cluster_sums(model, data);
  const double k = std::exp(-log_lambda);
  const double ek = log_gamma_excess(k);
  double l = 0.0;
  for (std::size_t i = 0; i < s.y_plus.size(); ++i) {
    const double z = s.y_plus[i] + k;
    l += log_gamma_excess(z) - ek - s.y_plus[i] + z * std::log1p((s.y_plus[i] - s.mu_plus[i]) / (s.mu_plus[i] + k));
  }
  return l;
}

RefineResult refine_lambda(const PgModel& model, const ClusteredDataset& data) {
  const auto sums = cluster_sums(model, data);
  if (sums.y_plus.empty()) throw EstimationError("refine_lambda: no clusters with observations");
  auto g = [&](double t) { return gradient_from_sums(sums, t); };

  RefineResult res;
  double lo = kLogLambdaFloor;
  double hi = std::log(1e4);
  const double g_lo = g(lo);
  if (g_lo <= 0.0) {
    res.lambda = kLambdaFloor;
    res.gradient = g_lo;
    res.at_floor = true;
    return res;
  }
  const double g_hi = g(hi);
  if (g_hi >= 0.0) {
    throw EstimationError("refine_lambda: profile likelihood still increasing at lambda = 1e4");
  }

  constexpr std::size_t kMaxIterations = 100;
  constexpr double kTolerance = 1e-8;
  std::ostringstream trace;
  double t = std::clamp(model.log_lambda, lo, hi);
  double gt = g(t);
  for (std::size_t it = 1; it <= kMaxIterations; ++it) {
    res.iterations = it;
    trace << " [" << it << "] log_lambda=" << t << " grad=" << gt;
    if (std::abs(gt) < kTolerance) {
      res.lambda = std::exp(t);
      res.gradient = gt;
      return res;
    }
    if (gt > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double h = 1e-5 * std::max(1.0, std::abs(t));
    const double slope = (g(t + h) - g(t - h)) / (2.0 * h);
    double next = slope < 0.0 ? t - gt / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(t))) {
      // Bracket collapsed: accept the midpoint if the gradient is at rounding level.
      next = 0.5 * (lo + hi);
      const double gn = g(next);
      if (std::abs(gn) < 1e3 * kTolerance) {
        res.lambda = std::exp(next);
        res.gradient = gn;
        return res;
      }
      break;
    }
    t = next;
    gt = g(t);
  }
  throw EstimationError("refine_lambda: no convergence in 100 iterations:" + trace.str());
}

}  // namespace pgnn
