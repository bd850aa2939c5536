#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "bidd/dependence/estimator.hpp"
#include "bidd/dependence/hsic.hpp"
#include "bidd/dependence/ksg.hpp"
#include "bidd/error.hpp"
#include "bidd/numerics/rng.hpp"
#include "bidd/numerics/special.hpp"

using namespace bidd;

namespace {

struct Sample {
  std::vector<double> x, y;
};

Sample gaussian_pair(Rng& rng, std::size_t n, double rho) {
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.normal(), v = rng.normal();
    s.x.push_back(u);
    s.y.push_back(rho * u + std::sqrt(1.0 - rho * rho) * v);
  }
  return s;
}

double brute_median(const std::vector<double>& x) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (x[i] != x[j]) d.push_back(std::abs(x[i] - x[j]));
    }
  }
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  return m % 2 == 1 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
}

// Quadratic-time KSG estimator 1 on un-jittered data.
double brute_ksg(const std::vector<double>& x, const std::vector<double>& y, std::size_t k) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(std::max(std::abs(x[i] - x[j]), std::abs(y[i] - y[j])));
    }
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    const double eps = d[k - 1];
    std::size_t nx = 0, ny = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (std::abs(x[i] - x[j]) < eps) ++nx;
      if (std::abs(y[i] - y[j]) < eps) ++ny;
    }
    acc += digamma(static_cast<double>(nx + 1)) + digamma(static_cast<double>(ny + 1));
  }
  return digamma(static_cast<double>(k)) + digamma(static_cast<double>(n)) - acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("median of nonzero pairwise distances") {
  Rng rng(1);
  for (std::size_t n : {2u, 3u, 4u, 17u, 200u, 501u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    CHECK(median_pairwise_distance(x) == brute_median(x));
  }
  // Heavy ties: repeated conditions and an integer grid.
  std::vector<double> rep, grid;
  for (int i = 0; i < 300; ++i) rep.push_back(std::floor(i / 10) * 0.37);
  for (int i = 0; i < 400; ++i) grid.push_back(static_cast<double>(rng.below(7)));
  CHECK(median_pairwise_distance(rep) == brute_median(rep));
  CHECK(median_pairwise_distance(grid) == brute_median(grid));
  CHECK(median_pairwise_distance(std::vector<double>(10, 2.5)) == 0.0);
  CHECK(median_pairwise_distance(std::vector<double>{1.0, 1.0, 1.0, 4.0}) == 3.0);
}

TEST_CASE("hsic agrees with the dense reference") {
  Rng rng(2);
  for (double rho : {0.0, 0.5, 0.95}) {
    const Sample s = gaussian_pair(rng, 300, rho);
    const double fast = hsic(s.x, s.y);
    const double ref = hsic_reference(s.x, s.y);
    CHECK(fast == doctest::Approx(ref).epsilon(1e-10));
  }
  // Repeated condition values, as produced by oversampling.
  Sample s = gaussian_pair(rng, 400, 0.7);
  for (std::size_t i = 0; i < s.y.size(); ++i) s.y[i] = s.y[i / 8 * 8];
  CHECK(hsic(s.x, s.y, {0.5}) == doctest::Approx(hsic_reference(s.x, s.y, {0.5})).epsilon(1e-10));
  CHECK(hsic(s.x, s.y, {2.0}) == doctest::Approx(hsic_reference(s.x, s.y, {2.0})).epsilon(1e-10));
}

TEST_CASE("hsic degenerate inputs and errors") {
  Rng rng(3);
  const Sample s = gaussian_pair(rng, 50, 0.5);
  const std::vector<double> constant(50, 1.25);
  CHECK(hsic(constant, s.y) == 0.0);
  CHECK(hsic(s.x, constant) == 0.0);
  CHECK(hsic_reference(constant, s.y) == 0.0);
  CHECK_THROWS_AS(hsic(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), ParameterError);
  const std::vector<double> shorter(49, 0.0);
  CHECK_THROWS_AS(hsic(s.x, shorter), ParameterError);
  std::vector<double> bad = s.x;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(hsic(bad, s.y), NumericError);
  CHECK_THROWS_AS(hsic(s.x, s.y, {0.0}), ConfigError);
}

TEST_CASE("hsic is exactly symmetric and deterministic") {
  Rng rng(4);
  for (std::size_t n : {4u, 63u, 1000u, 3001u}) {
    Sample s = gaussian_pair(rng, n, 0.3);
    for (std::size_t i = 0; i < n; ++i) s.y[i] = s.y[i / 3 * 3];
    CHECK(hsic(s.x, s.y) == hsic(s.y, s.x));
    CHECK(hsic(s.x, s.y) == hsic(s.x, s.y));
  }
}

TEST_CASE("hsic and ksg do not depend on the thread count") {
  Rng rng(41);
  const Sample s = gaussian_pair(rng, 2500, 0.4);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double h1 = hsic(s.x, s.y), k1 = ksg_mi(s.x, s.y);
  omp_set_num_threads(4);
  const double h4 = hsic(s.x, s.y), k4 = ksg_mi(s.x, s.y);
  omp_set_num_threads(saved);
  CHECK(h1 == h4);
  CHECK(k1 == k4);
}

TEST_CASE("hsic separates dependent from independent samples") {
  Rng rng(5);
  int wins = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Sample ind = gaussian_pair(rng, 2000, 0.0);
    const Sample dep = gaussian_pair(rng, 2000, 0.9);
    if (hsic(dep.x, dep.y) > hsic(ind.x, ind.y)) ++wins;
  }
  CHECK(wins >= 99);
}

TEST_CASE("hsic is invariant to translation and positive scaling") {
  Rng rng(6);
  const Sample s = gaussian_pair(rng, 500, 0.6);
  const double base = hsic(s.x, s.y);
  std::vector<double> shifted = s.x, scaled = s.y;
  for (auto& v : shifted) v += 3.0;
  for (auto& v : scaled) v *= 7.5;
  CHECK(std::abs(hsic(shifted, s.y) - base) < 1e-9 * base);
  CHECK(std::abs(hsic(s.x, scaled) - base) < 1e-9 * base);
  CHECK(std::abs(hsic(shifted, scaled) - base) < 1e-9 * base);
}

TEST_CASE("permutation p-value") {
  Rng rng(7);
  const Sample s = gaussian_pair(rng, 200, 0.0);
  Rng perm(1);
  CHECK(hsic_permutation_pvalue(s.x, s.x, {}, 199, perm) <= 0.01);
  CHECK_THROWS_AS(hsic_permutation_pvalue(s.x, s.y, {}, 98, perm), ParameterError);

  int rejections = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Sample ind = gaussian_pair(rng, 200, 0.0);
    const double p = hsic_permutation_pvalue(ind.x, ind.y, {}, 199, perm);
    CHECK(p >= 1.0 / 200.0);
    CHECK(p <= 1.0);
    if (p <= 0.05) ++rejections;
  }
  CHECK(rejections >= 1);
  CHECK(rejections <= 12);
}

TEST_CASE("affine rescaling by the noise schedule keeps the test outcome") {
  // A and eps independent; compare (A, eps) with (sqrt(ab) A, sqrt(1 - ab) eps).
  Rng rng(8);
  const double ab = 0.3;
  int accept_raw = 0, accept_scaled = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Sample s = gaussian_pair(rng, 150, 0.0);
    std::vector<double> a = s.x, e = s.y;
    for (auto& v : a) v *= std::sqrt(ab);
    for (auto& v : e) v *= std::sqrt(1.0 - ab);
    Rng p1(static_cast<std::uint64_t>(seed)), p2(static_cast<std::uint64_t>(seed));
    if (hsic_permutation_pvalue(s.x, s.y, {}, 99, p1) > 0.05) ++accept_raw;
    if (hsic_permutation_pvalue(a, e, {}, 99, p2) > 0.05) ++accept_scaled;
  }
  CHECK(std::abs(accept_raw - accept_scaled) < 10);
}

TEST_CASE("ksg matches a quadratic-time oracle") {
  Rng rng(9);
  for (std::size_t k : {1u, 3u, 5u}) {
    const Sample s = gaussian_pair(rng, 400, 0.6);
    CHECK(ksg_mi(s.x, s.y, {k}) == doctest::Approx(brute_ksg(s.x, s.y, k)).epsilon(1e-12));
  }
}

TEST_CASE("ksg accuracy on analytic cases") {
  Rng rng(10);
  std::vector<double> u1(5000), u2(5000);
  for (auto& v : u1) v = rng.uniform();
  for (auto& v : u2) v = rng.uniform();
  CHECK(std::abs(ksg_mi(u1, u2, {3})) < 0.05);

  const Sample g = gaussian_pair(rng, 5000, 0.9);
  const double analytic = -0.5 * std::log(1.0 - 0.81);
  CHECK(analytic == doctest::Approx(0.830).epsilon(1e-3));
  CHECK(std::abs(ksg_mi(g.x, g.y, {3}) - analytic) < 0.1);

  std::vector<double> ex = g.x;
  for (auto& v : ex) v = std::exp(v);
  CHECK(std::abs(ksg_mi(g.x, g.y, {3}) - ksg_mi(ex, g.y, {3})) < 0.05);
}

TEST_CASE("ksg symmetry, determinism and ties") {
  Rng rng(11);
  Sample s = gaussian_pair(rng, 1000, 0.4);
  for (std::size_t i = 0; i < s.y.size(); ++i) s.y[i] = s.y[i / 10 * 10];
  CHECK(ksg_mi(s.x, s.y) == ksg_mi(s.y, s.x));
  CHECK(ksg_mi(s.x, s.y, {5}) == ksg_mi(s.x, s.y, {5}));
  const std::vector<double> head(s.y.begin(), s.y.begin() + 50);
  CHECK(std::isfinite(ksg_mi(std::vector<double>(50, 1.0), head)));
  CHECK_THROWS_AS(ksg_mi(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}, {3}),
                  ParameterError);
  CHECK_THROWS_AS(ksg_mi(s.x, s.y, {0}), ConfigError);
}

TEST_CASE("estimator selection") {
  CHECK(parse_estimator("hsic").name() == "hsic");
  CHECK(parse_estimator("HSIC:0.5").name() == "hsic(scale=0.5)");
  CHECK(parse_estimator("ksg").name() == "ksg(k=3)");
  CHECK(parse_estimator("ksg:10").ksg.k == 10);
  CHECK(parse_estimator("ksg:10").family() == "ksg");
  CHECK_THROWS_AS(parse_estimator("pearson"), ConfigError);
  CHECK_THROWS_AS(parse_estimator("hsic:-1"), ConfigError);
  CHECK_THROWS_AS(parse_estimator("ksg:x"), ConfigError);

  Rng rng(12);
  const Sample s = gaussian_pair(rng, 300, 0.5);
  CHECK(Estimator::make_hsic(2.0)(s.x, s.y) == hsic(s.x, s.y, {2.0}));
  CHECK(Estimator::make_ksg(5)(s.x, s.y) == ksg_mi(s.x, s.y, {5}));
}
