#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bvfim {

using Vec = std::vector<double>;
using VecView = std::span<const double>;
using VecSpan = std::span<double>;

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  VecView row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  VecSpan row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

}  // namespace bvfim
