#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace etlinks {

/// Dense row-major matrix of doubles. Rows are contiguous so they can be fed
/// straight to the kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }

  void append_row(std::span<const double> values);

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b. Throws DimensionError on shape mismatch.
Matrix multiply(const Matrix& a, const Matrix& b);

/// aᵀ * b for two matrices with the same row count.
Matrix transpose_multiply(const Matrix& a, const Matrix& b);

double max_abs_difference(const Matrix& a, const Matrix& b);

/// ‖WᵀW − I‖_max.
double orthogonality_error(const Matrix& w);

/// Determinant by partial-pivot LU.
double determinant(Matrix a);

}  // namespace etlinks
