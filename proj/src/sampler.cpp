#include "focalflow/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace focalflow {

void AnchorConfig::validate() const {
  if (kind == AnchorKind::kLogitNormal && sigma <= 0.0) {
    throw std::invalid_argument("AnchorConfig: sigma must be positive, got " + std::to_string(sigma));
  }
  if (kind == AnchorKind::kFixed && (fixed_value < 0.0 || fixed_value > 1.0)) {
    throw std::invalid_argument("AnchorConfig: fixed_value must lie in [0, 1], got " +
                                std::to_string(fixed_value));
  }
}

AnchorKind anchor_kind_from_string(const std::string& name) {
  if (name == "uniform") return AnchorKind::kUniform;
  if (name == "logit_normal") return AnchorKind::kLogitNormal;
  if (name == "fixed") return AnchorKind::kFixed;
  throw std::invalid_argument("unknown anchor kind '" + name + "'");
}

std::string anchor_kind_to_string(AnchorKind kind) {
  switch (kind) {
    case AnchorKind::kUniform: return "uniform";
    case AnchorKind::kLogitNormal: return "logit_normal";
    case AnchorKind::kFixed: return "fixed";
  }
  throw std::logic_error("anchor_kind_to_string: bad enum");
}

double sample_tau(Rng& rng) { return rng.uniform(); }

double sample_anchor(const AnchorConfig& cfg, Rng& rng) {
  cfg.validate();
  switch (cfg.kind) {
    case AnchorKind::kUniform: return rng.uniform();
    case AnchorKind::kFixed: return cfg.fixed_value;
    case AnchorKind::kLogitNormal: {
      const double z = cfg.mu + cfg.sigma * rng.normal();
      return 1.0 / (1.0 + std::exp(-z));
    }
  }
  throw std::logic_error("sample_anchor: bad enum");
}

}  // namespace focalflow
