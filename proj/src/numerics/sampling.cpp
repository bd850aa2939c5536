#include "bidd/numerics/sampling.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "bidd/error.hpp"

namespace bidd {

namespace {

void check_variance(double variance) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw ParameterError("variance must be finite and >= 0, got " + std::to_string(variance));
  }
}

}  // namespace

std::vector<double> sample_gaussian(Rng& rng, double mean, double variance, std::size_t n) {
  check_variance(variance);
  const double sd = std::sqrt(variance);
  std::vector<double> out(n);
  for (auto& v : out) v = mean + sd * rng.normal();
  return out;
}

std::vector<double> sample_uniform_centered(Rng& rng, double variance, std::size_t n) {
  check_variance(variance);
  const double c = std::sqrt(3.0 * variance);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(-c, c);
  return out;
}

std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("correlation: length mismatch");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

void standardize(std::span<double> x) {
  const double m = mean(x);
  for (auto& v : x) v -= m;
  // Second centering pass removes the rounding residue of the first.
  const double m2 = mean(x);
  for (auto& v : x) v -= m2;
  const double var = variance(x);
  if (var > 0.0) {
    const double inv = 1.0 / std::sqrt(var);
    for (auto& v : x) v *= inv;
  }
}

}  // namespace bidd
