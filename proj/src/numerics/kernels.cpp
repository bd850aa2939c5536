#include "bidd/numerics/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#include "bidd/error.hpp"

namespace bidd::kernels {

namespace {

using v8d = double __attribute__((vector_size(64)));

constexpr std::size_t kMR = 6;
constexpr std::size_t kNR = 16;
constexpr std::size_t kKC = 256;
constexpr std::size_t kMC = 96;
constexpr std::size_t kNC = 1024;

void check_shapes(const ConstMatrixView& a, const ConstMatrixView& b, const MatrixView& c) {
  if (a.cols != b.rows || a.rows != c.rows || b.cols != c.cols) {
    throw ParameterError("gemm: shape mismatch");
  }
}

void scale_c(MatrixView c, double beta) {
  if (beta == 1.0) return;
  for (std::size_t i = 0; i < c.rows; ++i) {
    double* row = c.data + i * c.stride;
    if (beta == 0.0) {
      std::fill(row, row + c.cols, 0.0);
    } else {
      for (std::size_t j = 0; j < c.cols; ++j) row[j] *= beta;
    }
  }
}

// kc x nc block of b into NR-wide panels, zero padded.
void pack_b(const ConstMatrixView& b, std::size_t pc, std::size_t kc, std::size_t jc,
            std::size_t nc, double* out) {
  for (std::size_t jr = 0; jr < nc; jr += kNR) {
    const std::size_t nr = std::min(kNR, nc - jr);
    for (std::size_t p = 0; p < kc; ++p) {
      const double* src = b.data + (pc + p) * b.row_stride + (jc + jr) * b.col_stride;
      std::size_t j = 0;
      if (b.col_stride == 1) {
        for (; j < nr; ++j) out[j] = src[j];
      } else {
        for (; j < nr; ++j) out[j] = src[j * b.col_stride];
      }
      for (; j < kNR; ++j) out[j] = 0.0;
      out += kNR;
    }
  }
}

// mc x kc block of a into MR-tall panels, zero padded.
void pack_a(const ConstMatrixView& a, std::size_t ic, std::size_t mc, std::size_t pc,
            std::size_t kc, double* out) {
  for (std::size_t ir = 0; ir < mc; ir += kMR) {
    const std::size_t mr = std::min(kMR, mc - ir);
    for (std::size_t p = 0; p < kc; ++p) {
      const double* src = a.data + (ic + ir) * a.row_stride + (pc + p) * a.col_stride;
      std::size_t r = 0;
      for (; r < mr; ++r) out[r] = src[r * a.row_stride];
      for (; r < kMR; ++r) out[r] = 0.0;
      out += kMR;
    }
  }
}

void micro_kernel(std::size_t kc, const double* __restrict a, const double* __restrict b,
                  double* __restrict tile) {
  v8d acc[kMR][2];
  for (std::size_t r = 0; r < kMR; ++r) {
    acc[r][0] = v8d{};
    acc[r][1] = v8d{};
  }
  for (std::size_t p = 0; p < kc; ++p) {
    v8d b0, b1;
    std::memcpy(&b0, b, sizeof(v8d));
    std::memcpy(&b1, b + 8, sizeof(v8d));
#pragma GCC unroll 6
    for (std::size_t r = 0; r < kMR; ++r) {
      const double ar = a[r];
      acc[r][0] += ar * b0;
      acc[r][1] += ar * b1;
    }
    a += kMR;
    b += kNR;
  }
  for (std::size_t r = 0; r < kMR; ++r) {
    std::memcpy(tile + r * kNR, &acc[r][0], sizeof(v8d));
    std::memcpy(tile + r * kNR + 8, &acc[r][1], sizeof(v8d));
  }
}

void macro_block(const double* a_pack, const double* b_pack, std::size_t mc, std::size_t nc,
                 std::size_t kc, double alpha, double* c, std::size_t ldc) {
  alignas(64) double tile[kMR * kNR];
  for (std::size_t jr = 0; jr < nc; jr += kNR) {
    const std::size_t nr = std::min(kNR, nc - jr);
    const double* bp = b_pack + (jr / kNR) * kc * kNR;
    for (std::size_t ir = 0; ir < mc; ir += kMR) {
      const std::size_t mr = std::min(kMR, mc - ir);
      micro_kernel(kc, a_pack + (ir / kMR) * kc * kMR, bp, tile);
      for (std::size_t r = 0; r < mr; ++r) {
        double* crow = c + (ir + r) * ldc + jr;
        const double* trow = tile + r * kNR;
        for (std::size_t j = 0; j < nr; ++j) crow[j] += alpha * trow[j];
      }
    }
  }
}

}  // namespace

void gemm(ConstMatrixView a, ConstMatrixView b, MatrixView c, double alpha, double beta) {
  check_shapes(a, b, c);
  scale_c(c, beta);
  const std::size_t m = c.rows, n = c.cols, k = a.cols;
  if (m == 0 || n == 0 || k == 0 || alpha == 0.0) return;

  const std::size_t nc_max = std::min(kNC, (n + kNR - 1) / kNR * kNR);
  std::vector<double> b_pack(kKC * nc_max);
  const std::size_t m_blocks = (m + kMC - 1) / kMC;
  const bool parallel = m_blocks > 1 && m * n * k > (1u << 18);

  for (std::size_t jc = 0; jc < n; jc += kNC) {
    const std::size_t nc = std::min(kNC, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKC) {
      const std::size_t kc = std::min(kKC, k - pc);
      pack_b(b, pc, kc, jc, nc, b_pack.data());
#pragma omp parallel if (parallel)
      {
        std::vector<double> a_pack(kMC * kc);
#pragma omp for schedule(static)
        for (std::size_t blk = 0; blk < m_blocks; ++blk) {
          const std::size_t ic = blk * kMC;
          const std::size_t mc = std::min(kMC, m - ic);
          pack_a(a, ic, mc, pc, kc, a_pack.data());
          macro_block(a_pack.data(), b_pack.data(), mc, nc, kc, alpha,
                      c.data + ic * c.stride + jc, c.stride);
        }
      }
    }
  }
}

void gemm_reference(ConstMatrixView a, ConstMatrixView b, MatrixView c, double alpha,
                    double beta) {
  check_shapes(a, b, c);
  for (std::size_t i = 0; i < c.rows; ++i) {
    for (std::size_t j = 0; j < c.cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) s += a(i, p) * b(p, j);
      c(i, j) = alpha * s + (beta == 0.0 ? 0.0 : beta * c(i, j));
    }
  }
}

void column_sums(ConstMatrixView m, std::span<double> out, bool accumulate) {
  if (out.size() != m.cols) throw ParameterError("column_sums: size mismatch");
  if (!accumulate) std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += m(i, j);
  }
}

void add_row_vector(MatrixView m, std::span<const double> bias) {
  if (bias.size() != m.cols) throw ParameterError("add_row_vector: size mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = m.data + i * m.stride;
    for (std::size_t j = 0; j < m.cols; ++j) row[j] += bias[j];
  }
}

}  // namespace bidd::kernels
