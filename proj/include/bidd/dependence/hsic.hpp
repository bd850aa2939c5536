#pragma once

#include <cstddef>
#include <span>

#include "bidd/numerics/rng.hpp"

namespace bidd {

struct HsicConfig {
  /// Multiplies the median-heuristic bandwidth.
  double bandwidth_scale = 1.0;

  /// Throws ConfigError unless bandwidth_scale is positive and finite.
  void validate() const;
};

/// Exact median of the nonzero |x_i - x_j|, i < j; 0 when every pair is tied.
/// O(n log n) time and O(n) memory apart from the final bracket of candidates.
double median_pairwise_distance(std::span<const double> x);

/// Biased HSIC (1/n^2) trace(K H L H) with Gaussian kernels
/// k(u, v) = exp(-(u - v)^2 / (2 sigma^2)), sigma = scale * median_pairwise_distance.
/// Returns 0 when either variable has no nonzero pairwise distance.
/// Throws ParameterError unless both inputs have the same length n >= 4.
/// Pair sums run in a fixed block decomposition, so the value does not
/// depend on the number of OpenMP threads.
double hsic(std::span<const double> x, std::span<const double> y, const HsicConfig& cfg = {});

/// Serial dense-matrix evaluation of the same statistic (std::exp, explicit
/// centering, sort-based median). O(n^2) memory; meant for testing.
double hsic_reference(std::span<const double> x, std::span<const double> y,
                      const HsicConfig& cfg = {});

/// Permutation p-value (1 + #{stat_perm >= stat_obs}) / (permutations + 1),
/// permuting y. Throws ParameterError when permutations < 99.
double hsic_permutation_pvalue(std::span<const double> x, std::span<const double> y,
                               const HsicConfig& cfg, std::size_t permutations, Rng& rng);

}  // namespace bidd
