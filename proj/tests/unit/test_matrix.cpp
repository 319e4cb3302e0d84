#include <cmath>

#include "doctest.h"
#include "ntd/common.hpp"
#include "ntd/matrix.hpp"
#include "ntd/rng.hpp"

using ntd::Mat;

namespace {

Mat random_mat(std::size_t r, std::size_t c, ntd::Rng& rng) {
  Mat m(r, c);
  for (double& v : m.data) v = rng.normal(0.0, 1.0);
  return m;
}

// Independent oracle: classic dot-product order, no skips.
Mat matmul_oracle(const Mat& a, const Mat& b) {
  Mat out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace

TEST_CASE("matmul identity") {
  Mat id(2, 2);
  id(0, 0) = id(1, 1) = 1.0;
  Mat a(2, 2);
  a.data = {3.5, -1.25, 0.75, 9.0};
  const Mat out = matmul(id, a);
  CHECK(out.data == a.data);
}

TEST_CASE("matmul hand arithmetic") {
  Mat a(2, 2), b(2, 1);
  a.data = {1, 2, 3, 4};
  b.data = {0, 1};
  const Mat out = matmul(a, b);
  CHECK(out.rows == 2);
  CHECK(out.cols == 1);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 0) == 4.0);
}

TEST_CASE("matmul matches triple-loop oracle") {
  ntd::Rng rng(42);
  const Mat a = random_mat(3, 4, rng);
  const Mat b = random_mat(4, 2, rng);
  const Mat got = matmul(a, b);
  const Mat want = matmul_oracle(a, b);
  for (std::size_t i = 0; i < got.data.size(); ++i)
    CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
}

TEST_CASE("matmul shape error names both shapes") {
  Mat a(3, 4), b(5, 2);
  try {
    matmul(a, b);
    FAIL("no throw");
  } catch (const ntd::shape_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3x4") != std::string::npos);
    CHECK(msg.find("5x2") != std::string::npos);
  }
}

TEST_CASE("matmul associativity on random matrices") {
  ntd::Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat a = random_mat(4, 3, rng);
    const Mat b = random_mat(3, 5, rng);
    const Mat c = random_mat(5, 2, rng);
    const Mat left = matmul(matmul(a, b), c);
    const Mat right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.data.size(); ++i) {
      const double denom = std::max({std::abs(left.data[i]), std::abs(right.data[i]), 1.0});
      CHECK(std::abs(left.data[i] - right.data[i]) / denom < 1e-9);
    }
  }
}

TEST_CASE("transpose is an involution") {
  ntd::Rng rng(3);
  const Mat a = random_mat(5, 3, rng);
  const Mat back = transpose(transpose(a));
  CHECK(back.rows == a.rows);
  CHECK(back.data == a.data);
}

TEST_CASE("frobenius of zero matrix") {
  CHECK(frobenius_norm(Mat(4, 7)) == 0.0);
}

TEST_CASE("frobenius is sqrt of the exact integer square sum") {
  ntd::Rng rng(11);
  Mat a(6, 5);
  long long sum = 0;
  for (double& v : a.data) {
    const long long x = static_cast<long long>(rng.index(21)) - 10;
    v = static_cast<double>(x);
    sum += x * x;
  }
  CHECK(frobenius_norm(a) == std::sqrt(static_cast<double>(sum)));
}

TEST_CASE("elementwise_div applies the floor") {
  Mat a(1, 1), b(1, 1);
  a(0, 0) = 1.0;
  b(0, 0) = 0.0;
  const Mat out = elementwise_div(a, b, 1e-12);
  CHECK(out(0, 0) == 1e12);
}

TEST_CASE("hadamard and elementwise_div reject shape mismatch") {
  CHECK_THROWS_AS(hadamard(Mat(2, 2), Mat(2, 3)), ntd::shape_error);
  CHECK_THROWS_AS(elementwise_div(Mat(2, 2), Mat(3, 2), 1e-12), ntd::shape_error);
}
