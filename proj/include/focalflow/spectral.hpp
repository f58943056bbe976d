#pragma once

#include <span>
#include <vector>

#include "focalflow/mat.hpp"

namespace focalflow {

// Orthonormal DCT-II of a fixed length L.
//
//   C[u] = c_u * sum_i x[i] * cos(pi/L * (i + 0.5) * u),
//   c_0 = sqrt(1/L), c_u = sqrt(2/L) for u > 0.
//
// The basis matrix is orthonormal, so the inverse is its transpose and the
// transform preserves the l2 norm exactly (up to roundoff). The L x L basis
// is precomputed once; O(L^2) applications are fine at the horizon lengths
// used here.
class DctPlan {
 public:
  explicit DctPlan(int length);

  int length() const { return length_; }
  const Mat& basis() const { return basis_; }

  std::vector<double> forward(std::span<const double> signal) const;
  std::vector<double> inverse(std::span<const double> coeffs) const;

  // Column-wise transform of an L x d trajectory: each action dimension is
  // transformed independently along time.
  Mat forward_columns(const Mat& trajectory) const;
  Mat inverse_columns(const Mat& coeffs) const;

 private:
  int length_;
  Mat basis_;   // row u = u-th basis function
};

}  // namespace focalflow
