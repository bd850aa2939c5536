#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bidd {

/// Read-only strided view. Element (i, j) lives at data[i * row_stride + j * col_stride],
/// so a transpose is a stride swap.
struct ConstMatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t row_stride = 0;
  std::size_t col_stride = 1;

  double operator()(std::size_t i, std::size_t j) const {
    return data[i * row_stride + j * col_stride];
  }
  ConstMatrixView t() const { return {data, cols, rows, col_stride, row_stride}; }
};

/// Mutable row-major view with unit column stride.
struct MatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;

  double& operator()(std::size_t i, std::size_t j) const { return data[i * stride + j]; }
  std::span<double> row(std::size_t i) const { return {data + i * stride, cols}; }
  operator ConstMatrixView() const { return {data, rows, cols, stride, 1}; }
  ConstMatrixView t() const { return ConstMatrixView(*this).t(); }
};

/// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  MatrixView view() { return {data_.data(), rows_, cols_, cols_}; }
  ConstMatrixView view() const { return cview(); }
  ConstMatrixView cview() const { return {data_.data(), rows_, cols_, cols_, 1}; }

  /// Reshape without preserving contents; reuses the allocation when it fits.
  void resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.resize(rows * cols);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace bidd
