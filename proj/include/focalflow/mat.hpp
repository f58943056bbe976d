#pragma once

#include <cstddef>
#include <vector>

namespace focalflow {

// Dense row-major matrix of doubles. Everything at this scale fits in cache,
// so no view machinery, just a flat buffer.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0);

  double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  double* row_ptr(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row_ptr(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(const Mat& a, double s);

// a (n x k) times b (k x m).
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

double sum_squares(const Mat& a);
double max_abs(const Mat& a);
bool all_finite(const Mat& a);

}  // namespace focalflow
