#pragma once

#include <cstddef>
#include <span>

namespace bidd {

struct KsgConfig {
  std::size_t k = 3;

  void validate() const;
};

/// Kraskov-Stoegbauer-Grassberger estimator 1 with the max-norm:
///   psi(k) + psi(n) - mean_i [psi(n_x(i) + 1) + psi(n_y(i) + 1)]
/// where n_x(i), n_y(i) count points strictly inside the distance to the k-th
/// joint neighbour of i. Ties are broken by a fixed jitter of relative size
/// 1e-10 (the same jitter vector on both columns, so the estimate is
/// symmetric in its arguments). Throws ParameterError when n <= k.
double ksg_mi(std::span<const double> x, std::span<const double> y, const KsgConfig& cfg = {});

}  // namespace bidd
