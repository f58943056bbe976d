#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "focalflow/autodiff.hpp"
#include "focalflow/mat.hpp"
#include "focalflow/rng.hpp"

namespace focalflow {

// MLP over [flattened flow state | sinusoidal time embedding | observation].
struct MlpConfig {
  int state_dim = 0;                 // L * d, also the output width
  int obs_dim = 0;
  std::vector<int> hidden = {128, 128};
  int time_embed_dim = 16;

  int input_dim() const { return state_dim + time_embed_dim + obs_dim; }
  int output_dim() const { return state_dim; }
  // (fan_in, fan_out) for each affine layer, hidden plus output.
  std::vector<std::pair<int, int>> layer_shapes() const;
  void validate() const;
};

struct MlpParams {
  std::vector<Mat> weights;          // fan_in x fan_out
  std::vector<Mat> biases;           // 1 x fan_out

  size_t count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

// Glorot-uniform weights (+-sqrt(6 / (fan_in + fan_out))), zero biases.
MlpParams init_params(const MlpConfig& cfg, Rng& rng);

// Geometric sin/cos ladder; resolves times on [0, 1] down to ~2^-(dim/2).
std::vector<double> time_embedding(double t, int dim);

// Rows of the network input matrix, one per sample. Shared by the plain and
// taped forward passes so the two cannot drift apart.
Mat assemble_input(const MlpConfig& cfg, const Mat& states, const std::vector<double>& times, const Mat& obs);

// Velocity prediction head. Forward with a fixed parameter set is a pure
// function of its inputs; the instance only tracks an evaluation counter for
// NFE accounting.
class VelocityField {
 public:
  explicit VelocityField(MlpConfig cfg);

  const MlpConfig& config() const { return cfg_; }
  MlpParams& params() { return params_; }
  const MlpParams& params() const { return params_; }

  void init(Rng& rng) { params_ = init_params(cfg_, rng); }

  // states: n x state_dim, times: n entries, obs: n x obs_dim -> n x state_dim.
  Mat forward(const MlpParams& p, const Mat& states, const std::vector<double>& times, const Mat& obs) const;
  Mat forward(const Mat& states, const std::vector<double>& times, const Mat& obs) const {
    return forward(params_, states, times, obs);
  }

  uint64_t eval_count() const { return evals_; }
  void reset_eval_count() { evals_ = 0; }

 private:
  MlpConfig cfg_;
  MlpParams params_;
  mutable uint64_t evals_ = 0;
};

// Differentiable binding of a parameter set onto a tape.
struct BoundMlp {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

BoundMlp bind_params(Tape& tape, const MlpParams& params);
Var mlp_forward_on_tape(Tape& tape, const MlpConfig& cfg, const BoundMlp& bound, Var input);

// Flat gradient aligned with MlpParams::flatten(). Requires backward to have run.
std::vector<double> collect_gradient(const Tape& tape, const BoundMlp& bound);

// Exponential moving average of the live parameters with warmup:
// decay_t = min(max_decay, (1 + t) / (10 + t)).
double ema_decay_at(int64_t step, double max_decay);

struct EmaShadow {
  MlpParams params;
  double max_decay = 0.9999;
};

void ema_update(EmaShadow& shadow, const MlpParams& live, int64_t step);

}  // namespace focalflow
