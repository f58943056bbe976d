#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "focalflow/mat.hpp"
#include "focalflow/rng.hpp"

namespace focalflow {

enum class TaskId { kLissajous, kReach, kPickSketch };

TaskId task_from_string(const std::string& name);
std::string task_to_string(TaskId task);
int task_action_dim(TaskId task);

// One policy decision worth of actions: chunk_size rows starting at
// start_step in the episode.
struct ActionChunk {
  Mat actions;          // chunk_size x d
  int start_step = 0;
};

// num_chunks consecutive chunks stacked along time: L = num_chunks * chunk_size rows.
struct MacroTrajectory {
  Mat actions;          // L x d
  int chunk_size = 0;
  int num_chunks = 0;

  int length() const { return actions.rows; }
};

// Flat conditioning vector: current end-point position first, then the
// previous n_obs - 1 positions (clamped at episode start).
struct Observation {
  std::vector<double> values;
};

// Expert episode. Invariant: states has exactly one more row than actions and
// states[k+1] == states[k] + actions[k] holds bit-exactly; the generators
// define actions first and integrate, rather than differencing positions.
struct Demonstration {
  TaskId task = TaskId::kReach;
  uint64_t seed = 0;    // root seed of the generating batch
  int index = 0;        // position within that batch
  Mat states;           // (T+1) x d
  Mat actions;          // T x d

  int steps() const { return actions.rows; }
  int dim() const { return actions.cols; }
  std::vector<double> goal() const;   // final expert position
};

// Per-dimension affine statistics shared by every demo in a dataset. Actions
// and positions are normalized separately; observations reuse the position
// statistics for each stacked frame.
struct Normalization {
  std::vector<double> action_shift, action_scale;
  std::vector<double> pos_shift, pos_scale;

  Mat normalize_actions(const Mat& a) const;
  Mat denormalize_actions(const Mat& a) const;
  std::vector<double> normalize_obs(const std::vector<double>& obs) const;
};

struct Dataset {
  std::vector<Demonstration> demos;
  Normalization norm;
  int n_obs = 2;

  int action_dim() const { return demos.empty() ? 0 : demos.front().dim(); }
  int obs_dim() const { return n_obs * action_dim(); }
  // Valid window starts for an L-step macro-trajectory in demo i.
  int num_windows(int demo, int macro_len) const;
};

MacroTrajectory concat_chunks(const std::vector<ActionChunk>& chunks);

Observation make_observation(const Mat& states, int t, int n_obs);

// Window at step t: observation from positions up to t, macro-trajectory of
// the next num_chunks * chunk_size actions. Requires t + L <= T.
std::pair<Observation, MacroTrajectory> extract_macro(const Demonstration& demo, int t,
                                                      int chunk_size, int num_chunks, int n_obs);

// Deterministic in (task, seed, count, length): bitwise identical on repeat calls.
std::vector<Demonstration> generate_expert(TaskId task, uint64_t seed, int count, int length);

Dataset build_dataset(std::vector<Demonstration> demos, int n_obs);

// Line-delimited records, version "focalflow-demos/1".
void save_demos(const std::filesystem::path& path, const std::vector<Demonstration>& demos);
std::vector<Demonstration> load_demos(const std::filesystem::path& path);

}  // namespace focalflow
