#pragma once

#include <span>

#include "bidd/numerics/matrix.hpp"

namespace bidd::kernels {

/// c = alpha * a * b + beta * c. Packed, register-blocked, OpenMP-parallel over
/// row blocks of c. Each element of c is reduced in a fixed order, so the
/// result does not depend on the thread count.
void gemm(ConstMatrixView a, ConstMatrixView b, MatrixView c, double alpha = 1.0,
          double beta = 0.0);

/// Serial triple-loop reference for gemm; used by tests and the benchmark.
void gemm_reference(ConstMatrixView a, ConstMatrixView b, MatrixView c, double alpha = 1.0,
                    double beta = 0.0);

/// out[j] (+)= sum_i m(i, j).
void column_sums(ConstMatrixView m, std::span<double> out, bool accumulate);

/// m(i, j) += bias[j] for every row.
void add_row_vector(MatrixView m, std::span<const double> bias);

}  // namespace bidd::kernels
