#include "ntd/matrix.hpp"

#include <cmath>
#include <string>

#include "ntd/common.hpp"

namespace ntd {

namespace {

std::string shape_str(const Mat& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void require_same_shape(const char* op, const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) {
    throw shape_error(std::string(op) + ": shape mismatch " + shape_str(a) +
                      " vs " + shape_str(b));
  }
}

}  // namespace

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) {
    throw shape_error("matmul: shape mismatch " + shape_str(a) + " * " +
                      shape_str(b));
  }
  Mat out(a.rows, b.cols, 0.0);
  // i-k-j order keeps the inner loop running over contiguous rows of b.
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

Mat hadamard(const Mat& a, const Mat& b) {
  require_same_shape("hadamard", a, b);
  Mat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

Mat elementwise_div(const Mat& a, const Mat& b, double floor) {
  require_same_shape("elementwise_div", a, b);
  if (!(floor > 0.0)) throw shape_error("elementwise_div: floor must be > 0");
  Mat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = a.data[i] / std::max(b.data[i], floor);
  return out;
}

double frobenius_norm(const Mat& a) {
  double sum = 0.0;
  for (double v : a.data) sum += v * v;
  return std::sqrt(sum);
}

}  // namespace ntd
