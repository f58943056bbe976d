#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "focalflow/evaluation.hpp"
#include "focalflow/network.hpp"
#include "focalflow/objectives.hpp"
#include "focalflow/sampler.hpp"
#include "focalflow/trajectory.hpp"

namespace focalflow {

struct TrainConfig {
  TaskId task = TaskId::kReach;
  std::string demos_path;     // empty: generate demo_count x demo_length from the data stream
  int demo_count = 10;
  int demo_length = 200;
  int n_obs = 2;
  int chunk_size = 4;         // H
  int num_chunks = 3;         // N
  std::vector<int> hidden = {128, 128};
  int time_embed_dim = 16;

  int epochs = 3;
  int steps_per_epoch = 0;    // 0: ceil(total extraction windows / batch_size)
  int batch_size = 128;
  double learning_rate = 1e-4;
  double beta1 = 0.95;
  double beta2 = 0.999;
  double weight_decay = 1e-6;
  double adam_eps = 1e-8;
  int warmup_steps = 500;
  double ema_max_decay = 0.9999;

  uint64_t seed = 1;
  int eval_every = 0;         // 0: no mid-run evaluation
  int eval_episodes = 10;
  int probe_every = 0;        // 0: no gradient-alignment probes

  ObjectiveConfig objective;
  AnchorConfig anchor;

  int macro_len() const { return chunk_size * num_chunks; }
  // Structural checks that do not need the dataset; warmup < total steps is
  // enforced by the trainer once the step budget is resolved.
  void validate() const;
};

// Linear 0 -> lr over warmup_steps, then cosine to exactly 0 at the last step.
double lr_schedule(int64_t step, int64_t total_steps, int warmup_steps, double lr);

// Adam moments with decoupled weight decay: the decay term scales the
// parameter directly and never enters m or v.
struct AdamW {
  double beta1 = 0.95;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;
  std::vector<double> m, v;
  int64_t t = 0;

  void init(size_t n);
  void step(std::vector<double>& params, const std::vector<double>& grad, double lr);
};

struct StepRecord {
  int64_t step = 0;
  double lr = 0.0;
  double loss_time = 0.0;
  double loss_freq = 0.0;
  double loss_total = 0.0;
  double grad_norm = 0.0;
  double anchor_below_tau = 0.0;  // batch fraction with r < tau
  bool has_probe = false;
  double probe_inner = 0.0;
  double probe_cosine = 0.0;
};

struct EvalRecord {
  int64_t step = 0;
  EvalAggregate closed;
};

// Everything needed to restart training mid-run or to stand a policy up for
// evaluation. Format "focalflow-ckpt/1": structured text, layer shapes, flat
// double arrays for live and shadow parameters, optimizer moments, stream
// states, step counter.
struct Checkpoint {
  std::string task = "reach";
  int chunk_size = 4;
  int num_chunks = 3;
  int n_obs = 2;
  int time_embed_dim = 16;
  std::vector<int> hidden = {128, 128};
  int action_dim = 2;

  int64_t step = 0;
  std::vector<double> live, shadow;
  std::vector<double> adam_m, adam_v;
  int64_t adam_t = 0;
  Normalization norm;
  uint64_t batch_state = 0, noise_state = 0, tau_state = 0, anchor_state = 0;
  bool oracle = false;  // test fixture: evaluation replays exact expert actions

  MlpConfig mlp_config() const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct RunResult {
  int64_t steps = 0;
  double top5_success = 0.0;   // mean of the five best closed-loop success rates
  EvalAggregate final_closed;
  EvalAggregate final_open;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);
  Trainer(TrainConfig cfg, std::vector<Demonstration> demos);

  const TrainConfig& config() const { return cfg_; }
  const Dataset& dataset() const { return ds_; }
  const VelocityField& net() const { return net_; }
  VelocityField& net() { return net_; }
  const EmaShadow& shadow() const { return shadow_; }
  int64_t step() const { return step_; }
  int64_t total_steps() const { return total_steps_; }

  StepRecord train_step();

  // Closed-loop rollouts over held-out episodes with the live parameters,
  // replanning every chunk_size steps. Stateless in the training streams, so
  // running it mid-loop never shifts the loss trajectory.
  EvalRecord evaluate();

  // Single-macro open-loop rollouts from t=0 on the held-out episodes.
  EvalAggregate open_loop_eval();

  Checkpoint snapshot() const;
  void restore(const Checkpoint& ck);

  // Full loop: step rows and eval rows appended to <run_dir>/metrics.jsonl,
  // checkpoint at every eval boundary and at the end, summary to
  // <run_dir>/final.json. Resumable: restore() then run() continues the log.
  RunResult run(const std::filesystem::path& run_dir);

 private:
  void init_from_dataset();
  StepRecord step_record_from_batch();

  TrainConfig cfg_;
  Dataset ds_;
  std::vector<Demonstration> heldout_;
  VelocityField net_;
  EmaShadow shadow_;
  ObjectiveBuilder builder_;
  AdamW opt_;
  Rng root_, batch_, noise_, tau_, anchor_;
  int64_t step_ = 0;
  int64_t total_steps_ = 0;
};

}  // namespace focalflow
