#include "pgnn/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include "pgnn/error.hpp"

namespace pgnn {

namespace {

// Kronrod nodes on [0, 1]; odd indices are the embedded Gauss points.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

Piece gk15(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t k = 0; k < 7; ++k) {
    const double dx = half * kNodes[k];
    const double s = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[k] * s;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * s;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate_gk15(const std::function<double(double)>& f, double lo, double hi,
                                const std::vector<double>& breakpoints,
                                const QuadratureOptions& options) {
  if (!(hi > lo)) throw DomainError("integrate_gk15: empty interval");
  std::vector<double> edges{lo};
  for (double b : breakpoints) {
    if (b > lo && b < hi) edges.push_back(b);
  }
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<Piece> queue;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    Piece p = gk15(f, edges[k], edges[k + 1]);
    total += p.value;
    error += p.error;
    queue.push(p);
  }

  QuadratureResult result;
  auto done = [&] {
    const double tol = std::max(options.abs_tol, options.rel_tol * std::abs(total));
    return error <= tol;
  };
  while (!done() && queue.size() < options.max_intervals) {
    Piece worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      queue.push(worst);
      break;
    }
    Piece left = gk15(f, worst.lo, mid);
    Piece right = gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  error = 0.0;
  result.intervals = queue.size();
  while (!queue.empty()) {
    total += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  result.value = total;
  result.abs_error = error;
  result.converged = error <= std::max(options.abs_tol, options.rel_tol * std::abs(total)) ||
                     error <= 1e3 * std::numeric_limits<double>::epsilon() * std::abs(total);
  return result;
}

double log_integrate_exp(const std::function<double(double)>& log_f, double lo, double hi,
                         double log_shift, const std::vector<double>& breakpoints,
                         const QuadratureOptions& options) {
  auto shifted = [&](double v) { return std::exp(log_f(v) - log_shift); };
  const QuadratureResult r = integrate_gk15(shifted, lo, hi, breakpoints, options);
  if (!r.converged || !(r.value > 0.0) || !std::isfinite(r.value)) {
    throw OracleError("log_integrate_exp: quadrature did not converge (estimate " +
                      std::to_string(r.value) + ", error " + std::to_string(r.abs_error) + ")");
  }
  return std::log(r.value) + log_shift;
}

}  // namespace pgnn
