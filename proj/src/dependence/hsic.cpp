#include "bidd/dependence/hsic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bidd/error.hpp"
#include "bidd/numerics/fast_math.hpp"
#include "bidd/numerics/matrix.hpp"

namespace bidd {

namespace {

// Pairs (i, j), i < j, with sorted[j] - sorted[i] <= d.
std::size_t count_within(const std::vector<double>& sorted, double d) {
  std::size_t count = 0, j = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    j = std::max(j, i + 1);
    while (j < sorted.size() && sorted[j] - sorted[i] <= d) ++j;
    count += j - i - 1;
  }
  return count;
}

// r-th smallest (1-based) of all pairwise differences of a sorted vector.
double select_pairwise(const std::vector<double>& sorted, std::size_t r) {
  const std::size_t n = sorted.size();
  double lo = -1.0;                         // count_within(lo) < r
  double hi = sorted.back() - sorted.front();  // count_within(hi) >= r
  std::size_t c_lo = 0, c_hi = n * (n - 1) / 2;
  while (c_hi - c_lo > 4 * n) {
    const double mid = lo < 0.0 ? hi / 2.0 : lo + (hi - lo) / 2.0;
    // No representable value left between the bounds: every candidate equals hi.
    if (!(mid > std::max(lo, 0.0)) || !(mid < hi)) return hi;
    const std::size_t c = count_within(sorted, mid);
    if (c >= r) {
      hi = mid;
      c_hi = c;
    } else {
      lo = mid;
      c_lo = c;
    }
  }
  // Enumerate differences in (lo, hi].
  std::vector<double> candidates;
  candidates.reserve(c_hi - c_lo);
  std::size_t first = 0, last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    first = std::max(first, i + 1);
    while (first < n && !(sorted[first] - sorted[i] > lo)) ++first;
    last = std::max(last, first);
    while (last < n && sorted[last] - sorted[i] <= hi) ++last;
    for (std::size_t j = first; j < last; ++j) candidates.push_back(sorted[j] - sorted[i]);
  }
  const std::size_t idx = r - c_lo - 1;
  std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(idx),
                   candidates.end());
  return candidates[idx];
}

double gamma_for(std::span<const double> x, double scale) {
  const double sigma = scale * median_pairwise_distance(x);
  return sigma > 0.0 ? 1.0 / (2.0 * sigma * sigma) : 0.0;
}

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("hsic: inputs differ in length");
  if (x.size() < 4) throw ParameterError("hsic: need at least 4 samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw NumericError("hsic: non-finite input");
    }
  }
}

struct PairSums {
  double kl = 0.0;           // sum_ij K_ij L_ij
  std::vector<double> rk;    // row sums of K
  std::vector<double> rl;    // row sums of L
};

constexpr std::size_t kMaxBlocks = 32;

// Row ranges of the upper triangle holding roughly equal pair counts.
std::vector<std::size_t> triangle_blocks(std::size_t n) {
  const std::size_t blocks = std::min<std::size_t>(kMaxBlocks, std::max<std::size_t>(1, n / 64));
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  std::vector<std::size_t> bounds{0};
  double acc = 0.0;
  for (std::size_t i = 0; i < n && bounds.size() < blocks; ++i) {
    acc += static_cast<double>(n - 1 - i);
    if (acc >= total * static_cast<double>(bounds.size()) / static_cast<double>(blocks)) {
      bounds.push_back(i + 1);
    }
  }
  bounds.push_back(n);
  return bounds;
}

PairSums pair_sums(std::span<const double> x, std::span<const double> y, double gx, double gy) {
  const std::size_t n = x.size();
  const std::vector<std::size_t> bounds = triangle_blocks(n);
  const std::size_t blocks = bounds.size() - 1;
  Matrix part_k(blocks, n), part_l(blocks, n);
  std::vector<double> part_kl(blocks, 0.0);
  const double* xs = x.data();
  const double* ys = y.data();

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t b = 0; b < blocks; ++b) {
    double* rk = part_k.row(b).data();
    double* rl = part_l.row(b).data();
    double kl = 0.0;
    for (std::size_t i = bounds[b]; i < bounds[b + 1]; ++i) {
      const double xi = xs[i], yi = ys[i];
      double s = 0.0, sk = 0.0, sl = 0.0;
#pragma omp simd reduction(+ : s, sk, sl)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = xi - xs[j];
        const double dy = yi - ys[j];
        const double k = fast_exp(-(dx * dx) * gx);
        const double l = fast_exp(-(dy * dy) * gy);
        s += k * l;
        sk += k;
        sl += l;
        rk[j] += k;
        rl[j] += l;
      }
      kl += s;
      rk[i] += sk;
      rl[i] += sl;
    }
    part_kl[b] = kl;
  }

  PairSums out;
  out.rk.assign(n, 1.0);  // diagonal k_ii = 1
  out.rl.assign(n, 1.0);
  out.kl = static_cast<double>(n);
  for (std::size_t b = 0; b < blocks; ++b) {
    out.kl += 2.0 * part_kl[b];
    const auto pk = part_k.row(b);
    const auto pl = part_l.row(b);
    for (std::size_t j = 0; j < n; ++j) {
      out.rk[j] += pk[j];
      out.rl[j] += pl[j];
    }
  }
  return out;
}

}  // namespace

void HsicConfig::validate() const {
  if (!(bandwidth_scale > 0.0) || !std::isfinite(bandwidth_scale)) {
    throw ConfigError("hsic: bandwidth scale must be positive");
  }
}

double median_pairwise_distance(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && s[j] == s[i]) ++j;
    const std::size_t g = j - i;
    zeros += g * (g - 1) / 2;
    i = j;
  }
  const std::size_t total = n * (n - 1) / 2;
  const std::size_t m = total - zeros;
  if (m == 0) return 0.0;
  if (m % 2 == 1) return select_pairwise(s, zeros + (m + 1) / 2);
  return 0.5 * (select_pairwise(s, zeros + m / 2) + select_pairwise(s, zeros + m / 2 + 1));
}

double hsic(std::span<const double> x, std::span<const double> y, const HsicConfig& cfg) {
  check_pair(x, y);
  cfg.validate();
  const double gx = gamma_for(x, cfg.bandwidth_scale);
  const double gy = gamma_for(y, cfg.bandwidth_scale);
  if (gx == 0.0 || gy == 0.0) return 0.0;
  const PairSums p = pair_sums(x, y, gx, gy);
  const double n = static_cast<double>(x.size());
  double cross = 0.0, sum_k = 0.0, sum_l = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cross += p.rk[i] * p.rl[i];
    sum_k += p.rk[i];
    sum_l += p.rl[i];
  }
  const double value = (p.kl - 2.0 * cross / n + sum_k * sum_l / (n * n)) / (n * n);
  return std::max(value, 0.0);
}

double hsic_reference(std::span<const double> x, std::span<const double> y,
                      const HsicConfig& cfg) {
  check_pair(x, y);
  cfg.validate();
  const std::size_t n = x.size();
  auto gram = [&](std::span<const double> v) {
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dist = std::abs(v[i] - v[j]);
        if (dist > 0.0) d.push_back(dist);
      }
    }
    Matrix g(n, n);
    if (d.empty()) return g;
    std::sort(d.begin(), d.end());
    const std::size_t m = d.size();
    const double med = m % 2 == 1 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
    const double sigma = cfg.bandwidth_scale * med;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double diff = v[i] - v[j];
        g(i, j) = std::exp(-diff * diff / (2.0 * sigma * sigma));
      }
    }
    return g;
  };
  Matrix k = gram(x);
  const Matrix l = gram(y);
  // K <- H K H
  std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
  double all = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_mean[i] += k(i, j) / static_cast<double>(n);
      col_mean[j] += k(i, j) / static_cast<double>(n);
      all += k(i, j);
    }
  }
  all /= static_cast<double>(n * n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      trace += (k(i, j) - row_mean[i] - col_mean[j] + all) * l(j, i);
    }
  }
  return std::max(trace / static_cast<double>(n * n), 0.0);
}

double hsic_permutation_pvalue(std::span<const double> x, std::span<const double> y,
                               const HsicConfig& cfg, std::size_t permutations, Rng& rng) {
  check_pair(x, y);
  cfg.validate();
  if (permutations < 99) throw ParameterError("hsic permutation test: need at least 99 permutations");
  const std::size_t n = x.size();
  const double gx = gamma_for(x, cfg.bandwidth_scale);
  const double gy = gamma_for(y, cfg.bandwidth_scale);
  if (gx == 0.0 || gy == 0.0) return 1.0;

  // trace(K H L_pi H) = sum_ij Kc_ij L_pi(i)pi(j) with Kc = H K H.
  Matrix kc(n, n), l(n, n);
  std::vector<double> row_mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      kc(i, j) = fast_exp(-(dx * dx) * gx);
      l(i, j) = fast_exp(-(dy * dy) * gy);
      row_mean[i] += kc(i, j);
    }
  }
  double all = 0.0;
  for (auto& r : row_mean) {
    all += r;
    r /= static_cast<double>(n);
  }
  all /= static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) kc(i, j) += all - row_mean[i] - row_mean[j];
  }
  auto statistic = [&](const std::vector<std::size_t>& perm) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto kr = kc.row(i);
      const auto lr = l.row(perm[i]);
      for (std::size_t j = 0; j < n; ++j) s += kr[j] * lr[perm[j]];
    }
    return s;
  };
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const double observed = statistic(perm);
  std::size_t exceed = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[rng.below(i + 1)]);
    if (statistic(perm) >= observed) ++exceed;
  }
  return static_cast<double>(1 + exceed) / static_cast<double>(permutations + 1);
}

}  // namespace bidd
