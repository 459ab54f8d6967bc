#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qlstm {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Small helper, no algebra beyond
/// what the datapath needs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }

  bool empty() const { return rows == 0 || cols == 0; }
};

}  // namespace qlstm
