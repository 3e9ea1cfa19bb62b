#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gpmal {

/// Dense row-major matrix of doubles. Rows are instances, columns are
/// features or embedding dimensions.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  const double* data() const noexcept { return values_.data(); }
  double* data() noexcept { return values_.data(); }
  const std::vector<double>& values() const noexcept { return values_; }

  Matrix transposed() const;
  /// Rows selected by index, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;
  /// Columns selected by index, in the given order.
  Matrix select_cols(std::span<const std::size_t> indices) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace gpmal
