#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "focalflow/config.hpp"
#include "focalflow/evaluation.hpp"
#include "focalflow/training.hpp"

namespace focalflow {

// FOCALFLOW_OUT when set and nonempty, else ./runs.
std::filesystem::path output_root();

struct GenArgs {
  std::string task = "reach";
  int count = 10;
  int length = 200;
  uint64_t seed = 1;
  std::string out;  // default <root>/demos.jsonl
};
std::filesystem::path run_gen(const GenArgs& args);

struct TrainArgs {
  std::string config_path;          // required
  std::string variant;              // optional objective/anchor preset
  std::vector<std::string> sets;    // key=value overrides, applied last
  std::string out_dir;              // default <root>/<task>_<variant>_seed<seed>
  bool resume = false;              // continue from <out_dir>/checkpoint.json
};
struct TrainOutcome {
  std::filesystem::path run_dir;
  RunResult result;
};
TrainOutcome run_train(const TrainArgs& args);

// Ablation presets couple the loss selector with the anchor distribution it
// was defined against; --set can still override either afterwards.
void apply_variant(KeyValues& kv, const std::string& variant);

struct EvalArgs {
  std::string ckpt;
  std::string demos;
  std::string mode = "closed_loop";
  int episodes = 10;
  int euler_steps = 0;  // 0: one-step terminal map, >0: Euler integration
  uint64_t seed = 7;
  std::string out_dir;  // default <root>/eval
};
EvalAggregate run_eval(const EvalArgs& args);

struct VerifyArgs {
  std::vector<std::string> only;
  uint64_t seed = 4242;
  std::string report_path;  // default <root>/verify_report.json
  bool quiet = false;
};
bool run_verify(const VerifyArgs& args);

struct SweepArgs {
  std::string grid_path;
  std::string out_dir;  // default <root>/sweep
};
// One run directory per grid point plus summary.csv. Points whose final.json
// already exists are skipped and only re-summarized.
std::filesystem::path run_sweep(const SweepArgs& args);

}  // namespace focalflow
