#pragma once

#include <cstddef>
#include <vector>

namespace ntd {

/// Dense row-major matrix of doubles. Everything in this project is desk
/// scale (a few thousand entries), so there is no sparse path and no BLAS.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, data.size() == rows*cols

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat hadamard(const Mat& a, const Mat& b);

/// a[i,j] / max(b[i,j], floor); floor must be > 0.
Mat elementwise_div(const Mat& a, const Mat& b, double floor);

double frobenius_norm(const Mat& a);

}  // namespace ntd
