#include "focalflow/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace focalflow {

Mat ot_interpolate(const Mat& m0, const Mat& m1, double t) {
  if (!m0.same_shape(m1)) {
    throw std::invalid_argument("ot_interpolate: shapes differ (" + std::to_string(m0.rows) + "x" +
                                std::to_string(m0.cols) + " vs " + std::to_string(m1.rows) + "x" +
                                std::to_string(m1.cols) + ")");
  }
  if (t < 0.0 || t > 1.0) {
    throw std::out_of_range("ot_interpolate: t = " + std::to_string(t) + " outside [0, 1]");
  }
  if (t == 0.0) return m0;
  if (t == 1.0) return m1;
  Mat out = m0;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = (1.0 - t) * m0.v[i] + t * m1.v[i];
  return out;
}

Mat terminal_map(const Mat& velocity, const FlowState& state) {
  if (!velocity.same_shape(state.state)) {
    throw std::invalid_argument("terminal_map: velocity " + std::to_string(velocity.rows) + "x" +
                                std::to_string(velocity.cols) + " vs state " + std::to_string(state.state.rows) +
                                "x" + std::to_string(state.state.cols));
  }
  Mat out = state.state;
  const double scale = 1.0 - state.time;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += scale * velocity.v[i];
  return out;
}

namespace {

Mat draw_noise(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (double& x : m.v) x = rng.normal();
  return m;
}

Mat as_row(const Mat& m) {
  Mat row(1, static_cast<int>(m.v.size()));
  row.v = m.v;
  return row;
}

Mat from_row(const Mat& row, int rows, int cols) {
  Mat m(rows, cols);
  m.v = row.v;
  return m;
}

Mat obs_row(const Observation& obs) {
  Mat row(1, static_cast<int>(obs.values.size()));
  row.v = obs.values;
  return row;
}

}  // namespace

MacroTrajectory one_step_infer(const VelocityField& net, const MlpParams& params,
                               const Observation& obs_normalized, Rng& noise_rng,
                               int chunk_size, int num_chunks, int action_dim) {
  const int macro_len = chunk_size * num_chunks;
  Mat m0 = draw_noise(noise_rng, macro_len, action_dim);
  Mat v_row = net.forward(params, as_row(m0), {0.0}, obs_row(obs_normalized));
  FlowState fs{m0, 0.0, obs_normalized};
  MacroTrajectory out;
  out.chunk_size = chunk_size;
  out.num_chunks = num_chunks;
  out.actions = terminal_map(from_row(v_row, macro_len, action_dim), fs);
  return out;
}

MacroTrajectory euler_infer(const VelocityField& net, const MlpParams& params,
                            const Observation& obs_normalized, Rng& noise_rng,
                            int chunk_size, int num_chunks, int action_dim, int steps) {
  if (steps < 1) throw std::invalid_argument("euler_infer: steps must be >= 1");
  const int macro_len = chunk_size * num_chunks;
  Mat x = draw_noise(noise_rng, macro_len, action_dim);
  const double dt = 1.0 / steps;
  Mat obs = obs_row(obs_normalized);
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    Mat v = net.forward(params, as_row(x), {t}, obs);
    for (size_t i = 0; i < x.v.size(); ++i) x.v[i] += dt * v.v[i];
  }
  MacroTrajectory out;
  out.chunk_size = chunk_size;
  out.num_chunks = num_chunks;
  out.actions = std::move(x);
  return out;
}

OneStepPolicy::OneStepPolicy(const VelocityField& net, const MlpParams& params, const Normalization& norm,
                             int chunk_size, int num_chunks, int n_obs)
    : net_(net), params_(params), norm_(norm), chunk_size_(chunk_size), num_chunks_(num_chunks), n_obs_(n_obs) {}

Mat OneStepPolicy::predict(const Observation& raw_obs, int /*t*/, Rng& noise_rng) {
  Observation obs{norm_.normalize_obs(raw_obs.values)};
  MacroTrajectory macro = one_step_infer(net_, params_, obs, noise_rng, chunk_size_, num_chunks_, action_dim());
  nfe_ += 1;
  return norm_.denormalize_actions(macro.actions);
}

EulerPolicy::EulerPolicy(const VelocityField& net, const MlpParams& params, const Normalization& norm,
                         int chunk_size, int num_chunks, int steps, int n_obs)
    : net_(net), params_(params), norm_(norm), chunk_size_(chunk_size), num_chunks_(num_chunks),
      steps_(steps), n_obs_(n_obs) {}

Mat EulerPolicy::predict(const Observation& raw_obs, int /*t*/, Rng& noise_rng) {
  Observation obs{norm_.normalize_obs(raw_obs.values)};
  MacroTrajectory macro = euler_infer(net_, params_, obs, noise_rng, chunk_size_, num_chunks_, action_dim(), steps_);
  nfe_ += static_cast<uint64_t>(steps_);
  return norm_.denormalize_actions(macro.actions);
}

OraclePolicy::OraclePolicy(const Demonstration& demo, const Normalization& norm, int chunk_size, int num_chunks)
    : demo_(demo), norm_(norm), chunk_size_(chunk_size), num_chunks_(num_chunks) {}

Mat OraclePolicy::predict(const Observation& /*raw_obs*/, int t, Rng& noise_rng) {
  const int macro_len = horizon();
  const int d = demo_.dim();
  Mat m1(macro_len, d, 0.0);
  for (int r = 0; r < macro_len; ++r) {
    const int step = t + r;
    if (step >= demo_.steps()) break;   // zero actions past the episode end
    for (int j = 0; j < d; ++j) m1(r, j) = demo_.actions(step, j);
  }
  Mat m1n = norm_.normalize_actions(m1);
  // Same protocol as the learned policy: draw noise, form the exact constant
  // velocity, land on M1 through the terminal map.
  Mat m0 = draw_noise(noise_rng, macro_len, d);
  FlowState fs{m0, 0.0, Observation{}};
  Mat pred = terminal_map(m1n - m0, fs);
  return norm_.denormalize_actions(pred);
}

RolloutMode rollout_mode_from_string(const std::string& name) {
  if (name == "open_loop") return RolloutMode::kOpenLoop;
  if (name == "closed_loop") return RolloutMode::kClosedLoop;
  throw std::invalid_argument("unknown rollout mode '" + name + "' (expected open_loop or closed_loop)");
}

std::string rollout_mode_to_string(RolloutMode mode) {
  return mode == RolloutMode::kOpenLoop ? "open_loop" : "closed_loop";
}

RolloutTrace rollout(Policy& policy, const Demonstration& demo, RolloutMode mode,
                     int exec_chunk, int max_steps, Rng& noise_rng) {
  const int macro_len = policy.horizon();
  const int d = policy.action_dim();
  if (d != demo.dim()) {
    throw std::invalid_argument("rollout: policy acts in " + std::to_string(d) + " dims, demo has " +
                                std::to_string(demo.dim()));
  }
  if (exec_chunk < 1 || exec_chunk > macro_len) {
    throw std::invalid_argument("rollout: exec_chunk " + std::to_string(exec_chunk) +
                                " outside [1, " + std::to_string(macro_len) + "]");
  }

  const uint64_t nfe_before = policy.nfe_total();
  RolloutTrace trace;
  trace.start.resize(d);
  for (int j = 0; j < d; ++j) trace.start[j] = demo.states(0, j);

  const int total = (mode == RolloutMode::kOpenLoop) ? macro_len : max_steps;
  if (total < 1) throw std::invalid_argument("rollout: nothing to execute (max_steps < 1)");
  trace.actions = Mat(total, d);
  trace.expert_actions = Mat(total, d, 0.0);
  trace.positions = Mat(total, d);
  trace.expert_positions = Mat(total, d);

  // Policy-side executed positions, absolute coordinates.
  std::vector<double> pos = trace.start;
  // History of visited positions for observation building: row 0 = start.
  Mat history(total + 1, d);
  for (int j = 0; j < d; ++j) history(0, j) = trace.start[j];

  int executed = 0;
  while (executed < total) {
    const Observation obs = make_observation(history, executed, policy.obs_frames());
    Mat plan = policy.predict(obs, executed, noise_rng);
    ++trace.inference_calls;
    const int take = (mode == RolloutMode::kOpenLoop)
                         ? macro_len
                         : std::min(exec_chunk, total - executed);
    for (int r = 0; r < take; ++r) {
      for (int j = 0; j < d; ++j) {
        const double a = plan(r, j);
        trace.actions(executed, j) = a;
        pos[j] += a;
        trace.positions(executed, j) = pos[j];
        history(executed + 1, j) = pos[j];
      }
      ++executed;
    }
  }

  // Aligned expert reference; actions past the demo end stay zero (the expert
  // has stopped) and positions hold at the final state.
  for (int k = 0; k < total; ++k) {
    for (int j = 0; j < d; ++j) {
      if (k < demo.steps()) {
        trace.expert_actions(k, j) = demo.actions(k, j);
        trace.expert_positions(k, j) = demo.states(k + 1, j);
      } else {
        trace.expert_positions(k, j) = demo.states(demo.states.rows - 1, j);
      }
    }
  }
  trace.truncated = total < demo.steps();
  trace.nfe = policy.nfe_total() - nfe_before;
  return trace;
}

}  // namespace focalflow
