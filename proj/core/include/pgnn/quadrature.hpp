#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pgnn {

struct QuadratureOptions {
  double rel_tol = 1e-13;
  double abs_tol = 0.0;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

// Globally adaptive 7/15-point Gauss-Kronrod on [lo, hi]. The optional
// breakpoints (inside the interval) seed the initial partition.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double lo, double hi,
                                const std::vector<double>& breakpoints = {},
                                const QuadratureOptions& options = {});

// log of the integral of exp(log_f) over [lo, hi]. The integrand is shifted
// by `log_shift` (typically log_f at its mode) before exponentiation, so
// values far outside double range are handled. Throws OracleError if the
// adaptive rule does not reach the tolerance.
double log_integrate_exp(const std::function<double(double)>& log_f, double lo, double hi,
                         double log_shift, const std::vector<double>& breakpoints = {},
                         const QuadratureOptions& options = {});

}  // namespace pgnn
