#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "focalflow/spectral.hpp"

namespace focalflow {

struct CheckResult {
  std::string name;
  bool pass = false;
  uint64_t seed = 0;    // reproduction seed for this check
  std::string detail;   // measured values, tolerances, first failure
};

// Forward-transform seam so tests can inject a broken normalization and watch
// the energy check fail.
using TransformFactory = std::function<std::function<std::vector<double>(std::span<const double>)>(int)>;
TransformFactory orthonormal_dct_factory();

// Energy preservation of the transform: ||x||^2 == ||Dx||^2 within 1e-10
// relative, random vectors per (trial, length).
CheckResult check_parseval(uint64_t seed, int trials, const std::vector<int>& lengths,
                           const TransformFactory& factory = orthonormal_dct_factory());

// Prediction-space alignment of the prefix loss against the full loss:
// cosine == ||Pe|| / ||e|| within 1e-12, strictly positive when Pe != 0.
// Gradients are pulled from the reverse-mode tape, not hand-derived.
CheckResult check_prediction_cosine(uint64_t seed, int trials);

// Constant drift e = c*1: max-abs coefficient gradient over max-abs time
// gradient equals sqrt(L) within 1e-9.
CheckResult check_spectral_gain(uint64_t seed, const std::vector<int>& lengths);

// Weighted spectral objective 0.5 ||W D e||^2: tape gradient equals
// D^T W^2 D e within 1e-9; a low-pass W attenuates the high-frequency half of
// the time-domain gradient relative to W = I.
CheckResult check_weighted_gradient(uint64_t seed, int trials);

// Anchor-distribution ordering: median and near-terminal mass of the
// logit-normal anchor, empirical first-order dominance over uniform on a
// 100-point grid, and E[eps(r)] separation for the synthetic decreasing
// eps(s) = (1-s)^2, all at 50k samples.
CheckResult check_fsd_ordering(uint64_t seed, int samples);

// Every objective variant's parameter gradient against central finite
// differences: relative error < 1e-5 on at least min_params parameters.
CheckResult check_gradients_fd(uint64_t seed, int min_params);

// Parameter-space alignment between the prefix time gradient and the spectral
// gradient. Measured only (positive fraction over random batches reported);
// the underlying claim rests on an assumption about temporal coupling, so
// this check never fails on sign alone.
CheckResult check_param_alignment(uint64_t seed, int batches);

// All checks in a fixed order, optionally filtered by name.
std::vector<CheckResult> run_all_checks(uint64_t seed, const std::vector<std::string>& only = {});

std::vector<std::string> check_names();

void write_check_report(const std::filesystem::path& path, const std::vector<CheckResult>& results);

}  // namespace focalflow
