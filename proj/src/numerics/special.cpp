#include "bidd/numerics/special.hpp"

#include <cmath>
#include <string>

#include "bidd/error.hpp"

namespace bidd {

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("digamma: argument must be finite and > 0, got " + std::to_string(x));
  }
  // Shift up with psi(x) = psi(x + 1) - 1/x until the asymptotic series converges.
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli terms B_{2k} / (2k): 1/12, -1/120, 1/252, -1/240, 1/132, -691/32760, 1/12
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

}  // namespace bidd
