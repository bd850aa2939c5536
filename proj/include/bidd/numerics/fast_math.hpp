#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>

namespace bidd {

/// exp(x) without calls or branches so loops over it vectorize.
/// Relative error about 2 ulp on [-708, 709]; inputs are clamped to that range
/// (exp(-708) ~ 3e-308 stands in for underflow).
inline double fast_exp(double x) noexcept {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  x = x < -708.0 ? -708.0 : x;
  x = x > 709.0 ? 709.0 : x;
  // Round-to-nearest via the 1.5 * 2^52 shift trick.
  constexpr double kShift = 6755399441055744.0;
  const double kd = (x * kLog2e + kShift) - kShift;
  const double r = (x - kd * kLn2Hi) - kd * kLn2Lo;
  // Taylor polynomial to degree 12 on |r| <= ln2 / 2.
  double p = 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const auto k = static_cast<std::int64_t>(kd);
  // Split 2^k in two factors so k near the ends of the range stays representable.
  const std::int64_t k1 = k >> 1;
  const std::int64_t k2 = k - k1;
  const std::uint64_t u1 = static_cast<std::uint64_t>(k1 + 1023) << 52;
  const std::uint64_t u2 = static_cast<std::uint64_t>(k2 + 1023) << 52;
  double s1, s2;
  std::memcpy(&s1, &u1, sizeof s1);
  std::memcpy(&s2, &u2, sizeof s2);
  return p * s1 * s2;
}

inline double fast_sigmoid(double x) noexcept { return 1.0 / (1.0 + fast_exp(-x)); }

/// out[i] = exp(-x[i]) over a block, then sigmoid(x[i]) = 1 / (1 + out[i]).
/// Kept as two passes: fusing the divide with fast_exp defeats GCC's vectorizer.
inline void sigmoid_block(const double* __restrict x, double* __restrict out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = fast_exp(-x[i]);
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + out[i]);
}

/// h[i] = z[i] * sigmoid(z[i]). h may alias z.
inline void silu(const double* z, double* h, std::size_t n) noexcept {
  constexpr std::size_t kBlock = 512;
  alignas(64) double s[kBlock];
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t len = std::min(kBlock, n - start);
    sigmoid_block(z + start, s, len);
    for (std::size_t i = 0; i < len; ++i) h[start + i] = z[start + i] * s[i];
  }
}

/// g[i] *= silu'(z[i]) = s (1 + z (1 - s)) with s = sigmoid(z[i]).
inline void silu_backward(const double* z, double* g, std::size_t n) noexcept {
  constexpr std::size_t kBlock = 512;
  alignas(64) double s[kBlock];
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t len = std::min(kBlock, n - start);
    sigmoid_block(z + start, s, len);
    for (std::size_t i = 0; i < len; ++i) {
      const double zi = z[start + i];
      g[start + i] *= s[i] * (1.0 + zi * (1.0 - s[i]));
    }
  }
}

}  // namespace bidd
