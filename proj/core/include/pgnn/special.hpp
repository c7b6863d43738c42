#pragma once

namespace pgnn {

// log Gamma(x) for x > 0. Lanczos approximation (g = 7, 9 terms).
double log_gamma(double x);

// psi(x) = d/dx log Gamma(x) for x > 0.
double digamma(double x);

// lgamma(z) - z log z + z. Evaluated through the Stirling series for large z
// so that the cancellation between the three terms never reaches the result.
double log_gamma_excess(double z);

// d/dz log_gamma_excess(z) = psi(z) - log z.
double digamma_excess(double z);

// e^v - 1 - v, accurate near v = 0.
double exp_minus_one_minus(double v);

// log(1 + d) - d, accurate near d = 0.
double log1p_minus(double d);

}  // namespace pgnn
