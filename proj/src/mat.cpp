#include "focalflow/mat.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace focalflow {

Mat::Mat(int r, int c, double fill)
    : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {
  if (r < 0 || c < 0) throw std::invalid_argument("Mat: negative shape");
}

static void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
  }
}

Mat operator+(const Mat& a, const Mat& b) {
  check_same_shape(a, b, "Mat+");
  Mat out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
  return out;
}

Mat operator-(const Mat& a, const Mat& b) {
  check_same_shape(a, b, "Mat-");
  Mat out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.v[i];
  return out;
}

Mat operator*(const Mat& a, double s) {
  Mat out = a;
  for (double& x : out.v) x *= s;
  return out;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) {
    throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols) +
                                " vs " + std::to_string(b.rows) + ")");
  }
  Mat out(a.rows, b.cols, 0.0);
  // i-k-j order keeps both b and out row-contiguous in the inner loop.
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

double sum_squares(const Mat& a) {
  double s = 0.0;
  for (double x : a.v) s += x * x;
  return s;
}

double max_abs(const Mat& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::fabs(x));
  return m;
}

bool all_finite(const Mat& a) {
  for (double x : a.v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace focalflow
