#include "arpen/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace arpen {

double digamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    return std::isinf(x) && x > 0.0 ? std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::quiet_NaN();
  }
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli tail: sum_k B_2k / (2k x^2k), Horner in 1/x^2.
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 * inv - tail;
}

double log_t_constant(double nu) {
  return std::lgamma(0.5 * (nu + 1.0)) + 0.5 * nu * std::log(nu) - 0.5 * std::log(std::numbers::pi) -
         std::lgamma(0.5 * nu);
}

}  // namespace arpen
