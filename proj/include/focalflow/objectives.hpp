#pragma once

#include <string>
#include <vector>

#include "focalflow/autodiff.hpp"
#include "focalflow/mat.hpp"
#include "focalflow/network.hpp"
#include "focalflow/spectral.hpp"

namespace focalflow {

// Training-arm selector. kFocal is the composite objective (prefix
// consistency + spectral regularization); the rest are the ablation and
// baseline arms. kWoLas and kFixedRLas share kFocal's loss and differ only in
// the anchor distribution; kWoFcoLas is an alias of kFlowPolicyBaseline.
enum class ObjectiveVariant {
  kFocal,
  kWoLas,
  kWoFcoLas,
  kTimeOnlyFco,
  kFreqOnlyFco,
  kFixedRLas,
  kFcoFullMacro,
  kFcoProxFreq,
  kFmBaseline,
  kFlowPolicyBaseline,
  kWeightedSpectral,
};

ObjectiveVariant variant_from_string(const std::string& name);
std::string variant_to_string(ObjectiveVariant v);

enum class BandMask { kAll, kLowOnly, kHighOnly };

BandMask band_mask_from_string(const std::string& name);
std::string band_mask_to_string(BandMask m);

struct ObjectiveConfig {
  ObjectiveVariant variant = ObjectiveVariant::kFocal;
  double lambda = 1e-4;          // weight of the structural (frequency) term
  double alpha = 1.0;            // velocity-matching weight, two-sided consistency baseline
  double delta_tau = 0.01;       // teacher-time offset for that baseline
  int prefix_rows = 0;           // 0 -> chunk_size
  BandMask band_mask = BandMask::kAll;
  int band_split = 0;            // 0 -> ceil(L / 4) lowest coefficients count as "low"
  std::vector<double> spectral_weights;  // per-coefficient, kWeightedSpectral; empty -> exp(-2u/L)

  void validate(int macro_len, int chunk_size) const;
};

// Consistency term: squared l2 over the first prefix_rows rows of
// (student prediction - teacher prediction). Teacher input is a plain value,
// never differentiated.
double loss_time(const Mat& student_pred, const Mat& teacher_pred, int prefix_rows);

// Structural term: squared l2 between column-wise DCT coefficients of the
// student prediction and of the clean expert macro-trajectory.
double loss_freq(const DctPlan& plan, const Mat& pred, const Mat& expert);

struct BatchTerms {
  Var total;                 // scalar node, mean over the batch
  double time_value = 0.0;   // component values at build time
  double freq_value = 0.0;
};

// Builds the selected training loss on a tape. Student nodes are
// differentiable; teacher predictions, expert targets, and flow-matching
// velocity targets enter as constants (stop-gradient by construction).
// All matrices are flattened batches: n x (L * d), row-major L x d per row.
class ObjectiveBuilder {
 public:
  ObjectiveBuilder(ObjectiveConfig cfg, int macro_len, int action_dim, int chunk_size);

  const ObjectiveConfig& config() const { return cfg_; }
  int prefix_rows() const { return prefix_; }
  int band_split() const { return split_; }

  bool needs_teacher() const;
  // Teacher time comes from the anchor distribution (vs. tau + delta_tau).
  bool anchored_teacher() const;
  // Adjacent-time teacher: r = tau + delta_tau, tau resampled to keep r <= 1.
  bool adjacent_teacher() const;

  BatchTerms build(Tape& tape, Var f_student, Var v_student, const Mat& f_teacher,
                   const Mat& v_teacher, const Mat& expert, const Mat& target_velocity) const;

 private:
  std::vector<double> coefficient_weights() const;  // per flattened column, empty if unweighted

  ObjectiveConfig cfg_;
  int macro_len_, action_dim_, chunk_size_, prefix_, split_;
  DctPlan plan_full_;
  DctPlan plan_prefix_;
};

// Alignment between the parameter gradients of the prefix time loss and the
// full spectral loss, both measured against the expert target on the same
// batch. Cosine is NaN when either gradient has zero norm.
struct GradAlignment {
  double inner = 0.0;
  double cosine = 0.0;
  double norm_time = 0.0;
  double norm_freq = 0.0;
};

GradAlignment grad_alignment_probe(const VelocityField& net, const MlpParams& params,
                                   const Mat& m_tau, const std::vector<double>& taus, const Mat& obs,
                                   const Mat& expert, int prefix_rows, int action_dim);

}  // namespace focalflow
