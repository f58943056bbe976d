#pragma once

#include <string>

#include "focalflow/rng.hpp"

namespace focalflow {

enum class AnchorKind { kUniform, kLogitNormal, kFixed };

// Distribution of the reference (anchor) time used by the consistency target.
// The logit-normal default concentrates anchors near the clean end of the
// flow: sigmoid(4.0) ~ 0.982 median, almost all mass above 0.5.
struct AnchorConfig {
  AnchorKind kind = AnchorKind::kLogitNormal;
  double mu = 4.0;
  double sigma = 1.6;
  double fixed_value = 1.0;

  void validate() const;
};

AnchorKind anchor_kind_from_string(const std::string& name);
std::string anchor_kind_to_string(AnchorKind kind);

// Interpolation time, uniform on [0, 1). Independent of the anchor draw; no
// ordering between the two is enforced.
double sample_tau(Rng& rng);

// r = sigmoid(mu + sigma * eps) for the logit-normal kind. No clamping: the
// sigmoid already maps into (0, 1).
double sample_anchor(const AnchorConfig& cfg, Rng& rng);

}  // namespace focalflow
