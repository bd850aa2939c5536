#include "bidd/dependence/ksg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include "bidd/error.hpp"
#include "bidd/numerics/rng.hpp"
#include "bidd/numerics/sampling.hpp"
#include "bidd/numerics/special.hpp"

namespace bidd {

namespace {

constexpr double kJitter = 1e-10;
constexpr std::uint64_t kJitterSeed = 0x6b7367;
constexpr std::size_t kLeafSize = 8;

// Static 2-d tree over an index permutation; max-norm k-nearest-neighbour queries.
class KdTree {
 public:
  KdTree(const std::vector<double>& x, const std::vector<double>& y) : x_(x), y_(y) {
    idx_.resize(x.size());
    std::iota(idx_.begin(), idx_.end(), 0);
    nodes_.reserve(2 * x.size() / kLeafSize + 2);
    build(0, idx_.size(), 0);
  }

  // Distance from point q to its k-th nearest other point.
  double kth_distance(std::size_t q, std::size_t k) const {
    std::priority_queue<double> heap;  // k smallest distances so far
    search(0, q, k, heap);
    return heap.top();
  }

 private:
  struct Node {
    std::size_t begin, end;
    int axis;  // -1 for a leaf
    double split;
    std::size_t left, right;
  };

  std::size_t build(std::size_t begin, std::size_t end, int depth) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end, -1, 0.0, 0, 0});
    if (end - begin <= kLeafSize) return id;
    const int axis = depth % 2;
    const auto& v = axis == 0 ? x_ : y_;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                     idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    const double split = v[idx_[mid]];
    const std::size_t left = build(begin, mid, depth + 1);
    const std::size_t right = build(mid, end, depth + 1);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::size_t node, std::size_t q, std::size_t k, std::priority_queue<double>& heap) const {
    const Node& nd = nodes_[node];
    if (nd.axis < 0) {
      for (std::size_t p = nd.begin; p < nd.end; ++p) {
        const std::size_t j = idx_[p];
        if (j == q) continue;
        const double d = std::max(std::abs(x_[j] - x_[q]), std::abs(y_[j] - y_[q]));
        if (heap.size() < k) {
          heap.push(d);
        } else if (d < heap.top()) {
          heap.pop();
          heap.push(d);
        }
      }
      return;
    }
    const double coord = nd.axis == 0 ? x_[q] : y_[q];
    const double diff = coord - nd.split;
    const std::size_t near = diff < 0.0 ? nd.left : nd.right;
    const std::size_t far = diff < 0.0 ? nd.right : nd.left;
    search(near, q, k, heap);
    if (heap.size() < k || std::abs(diff) <= heap.top()) search(far, q, k, heap);
  }

  const std::vector<double>& x_;
  const std::vector<double>& y_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
};

// Points of sorted other than the query itself with |v - c| < eps.
std::size_t count_strictly_within(const std::vector<double>& sorted, double c, double eps) {
  const auto left = std::partition_point(sorted.begin(), sorted.end(),
                                         [&](double v) { return v < c && !(c - v < eps); });
  const auto right = std::partition_point(left, sorted.end(),
                                          [&](double v) { return v <= c || v - c < eps; });
  return static_cast<std::size_t>(right - left) - 1;
}

std::vector<double> jittered(std::span<const double> v, const std::vector<double>& u) {
  const double sd = std::sqrt(variance(v));
  const double scale = kJitter * (sd > 0.0 ? sd : 1.0);
  std::vector<double> out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * u[i];
  return out;
}

}  // namespace

void KsgConfig::validate() const {
  if (k < 1) throw ConfigError("ksg: k must be at least 1");
}

double ksg_mi(std::span<const double> x, std::span<const double> y, const KsgConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size()) throw ParameterError("ksg: inputs differ in length");
  const std::size_t n = x.size();
  if (n <= cfg.k) throw ParameterError("ksg: need more samples than neighbours");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw NumericError("ksg: non-finite input");
  }

  Rng rng(kJitterSeed);
  std::vector<double> u(n);
  for (auto& v : u) v = rng.uniform(-1.0, 1.0);
  const std::vector<double> xj = jittered(x, u);
  const std::vector<double> yj = jittered(y, u);

  const KdTree tree(xj, yj);
  std::vector<double> xs = xj, ys = yj;
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  std::vector<double> terms(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = tree.kth_distance(i, cfg.k);
    const std::size_t nx = count_strictly_within(xs, xj[i], eps);
    const std::size_t ny = count_strictly_within(ys, yj[i], eps);
    terms[i] = digamma(static_cast<double>(nx + 1)) + digamma(static_cast<double>(ny + 1));
  }
  double mean_term = 0.0;
  for (double t : terms) mean_term += t;
  mean_term /= static_cast<double>(n);
  return digamma(static_cast<double>(cfg.k)) + digamma(static_cast<double>(n)) - mean_term;
}

}  // namespace bidd
