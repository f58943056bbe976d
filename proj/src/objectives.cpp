#include "focalflow/objectives.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace focalflow {

ObjectiveVariant variant_from_string(const std::string& name) {
  if (name == "focal") return ObjectiveVariant::kFocal;
  if (name == "wo_las") return ObjectiveVariant::kWoLas;
  if (name == "wo_fco_las") return ObjectiveVariant::kWoFcoLas;
  if (name == "time_only_fco") return ObjectiveVariant::kTimeOnlyFco;
  if (name == "freq_only_fco") return ObjectiveVariant::kFreqOnlyFco;
  if (name == "fixed_r_las") return ObjectiveVariant::kFixedRLas;
  if (name == "fco_full_macro") return ObjectiveVariant::kFcoFullMacro;
  if (name == "fco_prox_freq") return ObjectiveVariant::kFcoProxFreq;
  if (name == "fm_baseline") return ObjectiveVariant::kFmBaseline;
  if (name == "flowpolicy_baseline") return ObjectiveVariant::kFlowPolicyBaseline;
  if (name == "weighted_spectral") return ObjectiveVariant::kWeightedSpectral;
  throw std::invalid_argument("unknown objective variant '" + name + "'");
}

std::string variant_to_string(ObjectiveVariant v) {
  switch (v) {
    case ObjectiveVariant::kFocal: return "focal";
    case ObjectiveVariant::kWoLas: return "wo_las";
    case ObjectiveVariant::kWoFcoLas: return "wo_fco_las";
    case ObjectiveVariant::kTimeOnlyFco: return "time_only_fco";
    case ObjectiveVariant::kFreqOnlyFco: return "freq_only_fco";
    case ObjectiveVariant::kFixedRLas: return "fixed_r_las";
    case ObjectiveVariant::kFcoFullMacro: return "fco_full_macro";
    case ObjectiveVariant::kFcoProxFreq: return "fco_prox_freq";
    case ObjectiveVariant::kFmBaseline: return "fm_baseline";
    case ObjectiveVariant::kFlowPolicyBaseline: return "flowpolicy_baseline";
    case ObjectiveVariant::kWeightedSpectral: return "weighted_spectral";
  }
  throw std::logic_error("variant_to_string: bad enum");
}

BandMask band_mask_from_string(const std::string& name) {
  if (name == "all") return BandMask::kAll;
  if (name == "low_only") return BandMask::kLowOnly;
  if (name == "high_only") return BandMask::kHighOnly;
  throw std::invalid_argument("unknown band mask '" + name + "'");
}

std::string band_mask_to_string(BandMask m) {
  switch (m) {
    case BandMask::kAll: return "all";
    case BandMask::kLowOnly: return "low_only";
    case BandMask::kHighOnly: return "high_only";
  }
  throw std::logic_error("band_mask_to_string: bad enum");
}

void ObjectiveConfig::validate(int macro_len, int chunk_size) const {
  if (lambda < 0.0) throw std::invalid_argument("ObjectiveConfig: lambda must be >= 0");
  if (alpha < 0.0) throw std::invalid_argument("ObjectiveConfig: alpha must be >= 0");
  if (delta_tau <= 0.0 || delta_tau >= 1.0) {
    throw std::invalid_argument("ObjectiveConfig: delta_tau must lie in (0, 1), got " + std::to_string(delta_tau));
  }
  const int prefix = prefix_rows > 0 ? prefix_rows : chunk_size;
  if (prefix < 1 || prefix > macro_len) {
    throw std::invalid_argument("ObjectiveConfig: prefix_rows " + std::to_string(prefix) +
                                " outside [1, " + std::to_string(macro_len) + "]");
  }
  if (band_split != 0 && (band_split < 1 || band_split >= macro_len)) {
    throw std::invalid_argument("ObjectiveConfig: band_split " + std::to_string(band_split) +
                                " outside [1, " + std::to_string(macro_len - 1) + "]");
  }
  if (!spectral_weights.empty()) {
    if (static_cast<int>(spectral_weights.size()) != macro_len) {
      throw std::invalid_argument("ObjectiveConfig: spectral_weights has " +
                                  std::to_string(spectral_weights.size()) + " entries, macro length is " +
                                  std::to_string(macro_len));
    }
    for (double w : spectral_weights)
      if (w < 0.0) throw std::invalid_argument("ObjectiveConfig: spectral_weights must be non-negative");
  }
}

double loss_time(const Mat& student_pred, const Mat& teacher_pred, int prefix_rows) {
  if (!student_pred.same_shape(teacher_pred)) {
    throw std::invalid_argument("loss_time: prediction shapes differ (" + std::to_string(student_pred.rows) +
                                "x" + std::to_string(student_pred.cols) + " vs " +
                                std::to_string(teacher_pred.rows) + "x" + std::to_string(teacher_pred.cols) + ")");
  }
  if (prefix_rows < 1 || prefix_rows > student_pred.rows) {
    throw std::out_of_range("loss_time: prefix " + std::to_string(prefix_rows) + " outside [1, " +
                            std::to_string(student_pred.rows) + "]");
  }
  double acc = 0.0;
  for (int i = 0; i < prefix_rows; ++i)
    for (int j = 0; j < student_pred.cols; ++j) {
      const double diff = student_pred(i, j) - teacher_pred(i, j);
      acc += diff * diff;
    }
  return acc;
}

double loss_freq(const DctPlan& plan, const Mat& pred, const Mat& expert) {
  if (!pred.same_shape(expert)) {
    throw std::invalid_argument("loss_freq: shapes differ (" + std::to_string(pred.rows) + "x" +
                                std::to_string(pred.cols) + " vs " + std::to_string(expert.rows) + "x" +
                                std::to_string(expert.cols) + ")");
  }
  const Mat diff = plan.forward_columns(pred) - plan.forward_columns(expert);
  return sum_squares(diff);
}

ObjectiveBuilder::ObjectiveBuilder(ObjectiveConfig cfg, int macro_len, int action_dim, int chunk_size)
    : cfg_(std::move(cfg)),
      macro_len_(macro_len),
      action_dim_(action_dim),
      chunk_size_(chunk_size),
      prefix_(cfg_.prefix_rows > 0 ? cfg_.prefix_rows : chunk_size),
      split_(cfg_.band_split > 0 ? cfg_.band_split : (macro_len + 3) / 4),
      plan_full_(macro_len),
      plan_prefix_(prefix_) {
  cfg_.validate(macro_len, chunk_size);
}

bool ObjectiveBuilder::needs_teacher() const {
  return cfg_.variant != ObjectiveVariant::kFmBaseline;
}

bool ObjectiveBuilder::adjacent_teacher() const {
  return cfg_.variant == ObjectiveVariant::kWoFcoLas ||
         cfg_.variant == ObjectiveVariant::kFlowPolicyBaseline;
}

bool ObjectiveBuilder::anchored_teacher() const { return needs_teacher() && !adjacent_teacher(); }

std::vector<double> ObjectiveBuilder::coefficient_weights() const {
  std::vector<double> w(macro_len_, 1.0);
  bool nontrivial = false;
  if (cfg_.variant == ObjectiveVariant::kWeightedSpectral) {
    if (cfg_.spectral_weights.empty()) {
      for (int u = 0; u < macro_len_; ++u) w[u] = std::exp(-2.0 * u / macro_len_);
    } else {
      w = cfg_.spectral_weights;
    }
    nontrivial = true;
  }
  if (cfg_.band_mask != BandMask::kAll) {
    for (int u = 0; u < macro_len_; ++u) {
      const bool low = u < split_;
      const bool keep = (cfg_.band_mask == BandMask::kLowOnly) ? low : !low;
      if (!keep) w[u] = 0.0;
    }
    nontrivial = true;
  }
  if (!nontrivial) return {};
  // Expand per-coefficient weights across the action dimensions of the
  // flattened row layout.
  std::vector<double> expanded(static_cast<size_t>(macro_len_) * action_dim_);
  for (int u = 0; u < macro_len_; ++u)
    for (int j = 0; j < action_dim_; ++j) expanded[static_cast<size_t>(u) * action_dim_ + j] = w[u];
  return expanded;
}

BatchTerms ObjectiveBuilder::build(Tape& tape, Var f_student, Var v_student, const Mat& f_teacher,
                                   const Mat& v_teacher, const Mat& expert, const Mat& target_velocity) const {
  const int n = tape.value(f_student).rows;
  if (n < 1) throw std::invalid_argument("ObjectiveBuilder::build: empty batch");
  const double inv_n = 1.0 / n;
  BatchTerms out;

  const auto variant = cfg_.variant;

  if (variant == ObjectiveVariant::kFmBaseline) {
    Var target = tape.constant(target_velocity);
    out.total = tape.scale(tape.sumsq(tape.sub(v_student, target)), inv_n);
    return out;
  }

  if (variant == ObjectiveVariant::kWoFcoLas || variant == ObjectiveVariant::kFlowPolicyBaseline) {
    Var cons = tape.scale(tape.sumsq(tape.sub(f_student, tape.constant(f_teacher))), inv_n);
    Var vel = tape.scale(tape.sumsq(tape.sub(v_student, tape.constant(v_teacher))), inv_n);
    out.total = tape.add(cons, tape.scale(vel, cfg_.alpha));
    out.time_value = tape.scalar(cons);
    out.freq_value = tape.scalar(vel);
    return out;
  }

  // Composite family: prefix consistency + a structural term against the expert.
  const bool full_prefix =
      variant == ObjectiveVariant::kFcoFullMacro || variant == ObjectiveVariant::kFcoProxFreq;
  const int prefix = full_prefix ? macro_len_ : prefix_;

  Var time_term;
  if (variant != ObjectiveVariant::kFreqOnlyFco) {
    Var diff = tape.sub(f_student, tape.constant(f_teacher));
    Var sliced = (prefix == macro_len_) ? diff : tape.slice_cols(diff, 0, prefix * action_dim_);
    time_term = tape.scale(tape.sumsq(sliced), inv_n);
    out.time_value = tape.scalar(time_term);
  }

  Var structural;
  if (variant == ObjectiveVariant::kTimeOnlyFco) {
    // Structural regularization swapped for a plain full-macro time-domain
    // error against the expert.
    structural = tape.scale(tape.sumsq(tape.sub(f_student, tape.constant(expert))), inv_n);
  } else if (variant == ObjectiveVariant::kFcoProxFreq) {
    // Spectral error restricted to the first H rows.
    const int w = prefix_ * action_dim_;
    Var student_head = tape.slice_cols(f_student, 0, w);
    Var expert_head = tape.slice_cols(tape.constant(expert), 0, w);
    Var diff = tape.sub(tape.dct_cols(student_head, plan_prefix_, action_dim_),
                        tape.dct_cols(expert_head, plan_prefix_, action_dim_));
    structural = tape.scale(tape.sumsq(diff), inv_n);
  } else {
    Var diff = tape.sub(tape.dct_cols(f_student, plan_full_, action_dim_),
                        tape.dct_cols(tape.constant(expert), plan_full_, action_dim_));
    const auto weights = coefficient_weights();
    if (!weights.empty()) diff = tape.col_scale(diff, weights);
    structural = tape.scale(tape.sumsq(diff), inv_n);
    if (variant == ObjectiveVariant::kWeightedSpectral) structural = tape.scale(structural, 0.5);
  }
  out.freq_value = tape.scalar(structural);

  if (variant == ObjectiveVariant::kFreqOnlyFco) {
    out.total = tape.scale(structural, cfg_.lambda);
  } else {
    out.total = tape.add(time_term, tape.scale(structural, cfg_.lambda));
  }
  return out;
}

GradAlignment grad_alignment_probe(const VelocityField& net, const MlpParams& params,
                                   const Mat& m_tau, const std::vector<double>& taus, const Mat& obs,
                                   const Mat& expert, int prefix_rows, int action_dim) {
  if (m_tau.rows < 1) throw std::invalid_argument("grad_alignment_probe: empty batch");
  if (m_tau.cols % action_dim != 0) {
    throw std::invalid_argument("grad_alignment_probe: row width " + std::to_string(m_tau.cols) +
                                " not a multiple of action dim " + std::to_string(action_dim));
  }
  const int macro_len = m_tau.cols / action_dim;
  if (prefix_rows < 1 || prefix_rows > macro_len) {
    throw std::out_of_range("grad_alignment_probe: prefix " + std::to_string(prefix_rows) +
                            " outside [1, " + std::to_string(macro_len) + "]");
  }
  const double inv_n = 1.0 / m_tau.rows;
  DctPlan plan(macro_len);
  std::vector<double> one_minus_tau(taus.size());
  for (size_t i = 0; i < taus.size(); ++i) one_minus_tau[i] = 1.0 - taus[i];

  auto gradient_of = [&](bool spectral) {
    Tape tape;
    BoundMlp bound = bind_params(tape, params);
    Var input = tape.constant(assemble_input(net.config(), m_tau, taus, obs));
    Var v = mlp_forward_on_tape(tape, net.config(), bound, input);
    Var f = tape.add(tape.constant(m_tau), tape.row_scale(v, one_minus_tau));
    Var diff = tape.sub(f, tape.constant(expert));
    Var loss;
    if (spectral) {
      loss = tape.scale(tape.sumsq(tape.dct_cols(diff, plan, action_dim)), inv_n);
    } else {
      Var sliced = (prefix_rows == macro_len) ? diff : tape.slice_cols(diff, 0, prefix_rows * action_dim);
      loss = tape.scale(tape.sumsq(sliced), inv_n);
    }
    tape.backward(loss);
    return collect_gradient(tape, bound);
  };

  const std::vector<double> g_time = gradient_of(false);
  const std::vector<double> g_freq = gradient_of(true);

  GradAlignment result;
  double nt = 0.0, nf = 0.0;
  for (size_t i = 0; i < g_time.size(); ++i) {
    result.inner += g_time[i] * g_freq[i];
    nt += g_time[i] * g_time[i];
    nf += g_freq[i] * g_freq[i];
  }
  result.norm_time = std::sqrt(nt);
  result.norm_freq = std::sqrt(nf);
  result.cosine = (result.norm_time > 0.0 && result.norm_freq > 0.0)
                      ? result.inner / (result.norm_time * result.norm_freq)
                      : std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace focalflow
