#pragma once

namespace arpen {

/// Digamma function for x > 0. Upward recurrence to x >= 10 followed by the
/// asymptotic expansion; absolute error below 1e-13 on (0, 1e8]. Returns NaN
/// for x <= 0.
double digamma(double x);

/// ln c_nu for the Student t density f(x) = c_nu / sigma * (nu + x^2/sigma^2)^{-(nu+1)/2},
/// c_nu = Gamma((nu+1)/2) nu^{nu/2} / (sqrt(pi) Gamma(nu/2)). Evaluated with
/// log-gamma; finite for every nu > 0 representable in double.
double log_t_constant(double nu);

}  // namespace arpen
