#pragma once

namespace bidd {

/// Digamma function psi(x) for x > 0, absolute error below 1e-12 on the
/// range used by the estimators. Throws DomainError for x <= 0.
double digamma(double x);

}  // namespace bidd
