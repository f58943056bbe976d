#pragma once

#include <cstdint>
#include <vector>

#include "focalflow/mat.hpp"
#include "focalflow/network.hpp"
#include "focalflow/rng.hpp"
#include "focalflow/trajectory.hpp"

namespace focalflow {

// Point on the straight interpolation path, plus its conditioning.
struct FlowState {
  Mat state;            // L x d
  double time = 0.0;    // in [0, 1]
  Observation observation;
};

// (1 - t) * m0 + t * m1, exact at the endpoints.
Mat ot_interpolate(const Mat& m0, const Mat& m1, double t);

// Straight-path terminal prediction: state + (1 - time) * v. With the exact
// constant velocity m1 - m0 this lands on m1 from any time.
Mat terminal_map(const Mat& velocity, const FlowState& state);

// Single-evaluation inference in normalized action space: draw M0 ~ N(0, I),
// evaluate the velocity at time 0, apply the terminal map. Exactly one
// network evaluation.
MacroTrajectory one_step_infer(const VelocityField& net, const MlpParams& params,
                               const Observation& obs_normalized, Rng& noise_rng,
                               int chunk_size, int num_chunks, int action_dim);

// Euler integration of the learned ODE from time 0 to 1; `steps` evaluations.
MacroTrajectory euler_infer(const VelocityField& net, const MlpParams& params,
                            const Observation& obs_normalized, Rng& noise_rng,
                            int chunk_size, int num_chunks, int action_dim, int steps);

// One decision: raw (denormalized) actions for the next L steps given a raw
// observation. `t` is the episode step, used only by the oracle.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Mat predict(const Observation& raw_obs, int t, Rng& noise_rng) = 0;
  virtual int horizon() const = 0;
  virtual int action_dim() const = 0;
  // Stacked position frames the observation must carry.
  virtual int obs_frames() const { return 2; }
  // Cumulative network evaluations across predict calls.
  virtual uint64_t nfe_total() const = 0;
};

class OneStepPolicy : public Policy {
 public:
  OneStepPolicy(const VelocityField& net, const MlpParams& params, const Normalization& norm,
                int chunk_size, int num_chunks, int n_obs = 2);
  Mat predict(const Observation& raw_obs, int t, Rng& noise_rng) override;
  int horizon() const override { return chunk_size_ * num_chunks_; }
  int action_dim() const override { return static_cast<int>(norm_.action_shift.size()); }
  int obs_frames() const override { return n_obs_; }
  uint64_t nfe_total() const override { return nfe_; }

 private:
  const VelocityField& net_;
  const MlpParams& params_;
  Normalization norm_;
  int chunk_size_, num_chunks_, n_obs_;
  uint64_t nfe_ = 0;
};

// Multi-evaluation ODE baseline (NFE = steps per decision).
class EulerPolicy : public Policy {
 public:
  EulerPolicy(const VelocityField& net, const MlpParams& params, const Normalization& norm,
              int chunk_size, int num_chunks, int steps = 10, int n_obs = 2);
  Mat predict(const Observation& raw_obs, int t, Rng& noise_rng) override;
  int horizon() const override { return chunk_size_ * num_chunks_; }
  int action_dim() const override { return static_cast<int>(norm_.action_shift.size()); }
  int obs_frames() const override { return n_obs_; }
  uint64_t nfe_total() const override { return nfe_; }

 private:
  const VelocityField& net_;
  const MlpParams& params_;
  Normalization norm_;
  int chunk_size_, num_chunks_, steps_, n_obs_;
  uint64_t nfe_ = 0;
};

// Exact-velocity reference: v = M1 - M0 reconstructed from the expert demo,
// run through the same noise draw and terminal map as the learned policy.
// Zero network evaluations. Windows past the demo end are padded with zeros.
class OraclePolicy : public Policy {
 public:
  OraclePolicy(const Demonstration& demo, const Normalization& norm, int chunk_size, int num_chunks);
  Mat predict(const Observation& raw_obs, int t, Rng& noise_rng) override;
  int horizon() const override { return chunk_size_ * num_chunks_; }
  int action_dim() const override { return demo_.dim(); }
  uint64_t nfe_total() const override { return 0; }

 private:
  const Demonstration& demo_;
  Normalization norm_;
  int chunk_size_, num_chunks_;
};

enum class RolloutMode { kOpenLoop, kClosedLoop };

RolloutMode rollout_mode_from_string(const std::string& name);
std::string rollout_mode_to_string(RolloutMode mode);

struct RolloutTrace {
  Mat actions;            // executed policy actions, n x d
  Mat expert_actions;     // aligned expert actions (zero-padded past demo end)
  Mat positions;          // absolute policy positions after each action
  Mat expert_positions;   // absolute expert positions after each action
  std::vector<double> start;
  int inference_calls = 0;
  uint64_t nfe = 0;
  bool truncated = false; // stopped by max_steps before the demo ended

  int length() const { return actions.rows; }
};

// Open loop: one decision from the demo's first observation, all L actions
// integrated blind. Closed loop: predict L, execute the first exec_chunk,
// re-observe from the policy's own positions, repeat until max_steps.
// noise_rng drives the per-decision noise draws; fresh noise every call.
RolloutTrace rollout(Policy& policy, const Demonstration& demo, RolloutMode mode,
                     int exec_chunk, int max_steps, Rng& noise_rng);

}  // namespace focalflow
