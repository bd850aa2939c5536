#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bidd/numerics/rng.hpp"

namespace bidd {

/// n i.i.d. draws from N(mean, variance). Throws ParameterError on negative variance.
std::vector<double> sample_gaussian(Rng& rng, double mean, double variance, std::size_t n);

/// n i.i.d. draws from U[-c, c] with c = sqrt(3 variance): mean 0, the given variance.
std::vector<double> sample_uniform_centered(Rng& rng, double variance, std::size_t n);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n);

double mean(std::span<const double> x);
/// Population variance (divides by n).
double variance(std::span<const double> x);
double correlation(std::span<const double> x, std::span<const double> y);

/// Shift and scale to mean 0, population variance 1. A constant column is only centered.
void standardize(std::span<double> x);

}  // namespace bidd
