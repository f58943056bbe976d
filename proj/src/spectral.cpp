#include "focalflow/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace focalflow {

DctPlan::DctPlan(int length) : length_(length) {
  if (length <= 0) throw std::invalid_argument("DctPlan: length must be positive, got " + std::to_string(length));
  basis_ = Mat(length, length);
  const double c0 = std::sqrt(1.0 / length);
  const double cu = std::sqrt(2.0 / length);
  for (int u = 0; u < length; ++u) {
    const double scale = (u == 0) ? c0 : cu;
    for (int i = 0; i < length; ++i) {
      basis_(u, i) = scale * std::cos(std::numbers::pi / length * (i + 0.5) * u);
    }
  }
}

std::vector<double> DctPlan::forward(std::span<const double> signal) const {
  if (static_cast<int>(signal.size()) != length_) {
    throw std::invalid_argument("DctPlan::forward: signal length " + std::to_string(signal.size()) +
                                " does not match plan length " + std::to_string(length_));
  }
  std::vector<double> out(length_, 0.0);
  for (int u = 0; u < length_; ++u) {
    const double* brow = basis_.row_ptr(u);
    double acc = 0.0;
    for (int i = 0; i < length_; ++i) acc += brow[i] * signal[i];
    out[u] = acc;
  }
  return out;
}

std::vector<double> DctPlan::inverse(std::span<const double> coeffs) const {
  if (static_cast<int>(coeffs.size()) != length_) {
    throw std::invalid_argument("DctPlan::inverse: coefficient length " + std::to_string(coeffs.size()) +
                                " does not match plan length " + std::to_string(length_));
  }
  // Orthonormal basis: inverse is the transpose.
  std::vector<double> out(length_, 0.0);
  for (int u = 0; u < length_; ++u) {
    const double* brow = basis_.row_ptr(u);
    const double cu = coeffs[u];
    for (int i = 0; i < length_; ++i) out[i] += brow[i] * cu;
  }
  return out;
}

Mat DctPlan::forward_columns(const Mat& trajectory) const {
  if (trajectory.rows != length_) {
    throw std::invalid_argument("DctPlan::forward_columns: trajectory has " + std::to_string(trajectory.rows) +
                                " rows, plan length is " + std::to_string(length_));
  }
  return matmul(basis_, trajectory);
}

Mat DctPlan::inverse_columns(const Mat& coeffs) const {
  if (coeffs.rows != length_) {
    throw std::invalid_argument("DctPlan::inverse_columns: coefficients have " + std::to_string(coeffs.rows) +
                                " rows, plan length is " + std::to_string(length_));
  }
  return matmul(transpose(basis_), coeffs);
}

}  // namespace focalflow
