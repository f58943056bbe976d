// Command-line front end. Talks to the core strictly through the C API so the
// shared library stays the single supported integration surface.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "focalflow/focalflow_c.h"

namespace {

int report(int rc) {
  if (rc != FF_OK) std::fprintf(stderr, "error: %s\n", ff_last_error());
  return rc;
}

struct GenOpts {
  std::string task = "reach";
  int count = 10;
  int length = 200;
  uint64_t seed = 1;
  std::string out;
};

int do_gen(const GenOpts& o) {
  char path[4096];
  int rc = ff_gen_demos(o.task.c_str(), o.count, o.length, o.seed,
                        o.out.empty() ? nullptr : o.out.c_str(), path, sizeof(path));
  if (rc == FF_OK) std::printf("wrote %s\n", path);
  return report(rc);
}

struct TrainOpts {
  std::string config;
  std::string variant;
  std::vector<std::string> sets;
  std::string out_dir;
  bool resume = false;
};

int do_train(const TrainOpts& o) {
  std::vector<const char*> sets;
  sets.reserve(o.sets.size());
  for (const std::string& s : o.sets) sets.push_back(s.c_str());
  ff_train_summary summary{};
  char run_dir[4096];
  int rc = ff_train(o.config.c_str(), o.variant.empty() ? nullptr : o.variant.c_str(),
                    sets.data(), sets.size(), o.out_dir.empty() ? nullptr : o.out_dir.c_str(),
                    o.resume ? 1 : 0, &summary, run_dir, sizeof(run_dir));
  if (rc == FF_OK) {
    std::printf("run dir: %s\n", run_dir);
    std::printf("steps: %" PRId64 "\n", summary.steps);
    std::printf("top5 success: %.6f\n", summary.top5_success);
    std::printf("closed-loop success: %.6f endpoint: %.6f\n", summary.closed_success,
                summary.closed_endpoint_error);
    std::printf("open-loop endpoint: %.6f\n", summary.open_endpoint_error);
  }
  return report(rc);
}

struct EvalOpts {
  std::string ckpt;
  std::string demos;
  std::string mode = "closed_loop";
  int episodes = 10;
  int euler_steps = 0;
  uint64_t seed = 7;
  std::string out_dir;
};

int do_eval(const EvalOpts& o) {
  ff_eval_summary s{};
  int rc = ff_eval(o.ckpt.c_str(), o.demos.c_str(), o.mode.c_str(), o.episodes, o.euler_steps,
                   o.seed, o.out_dir.empty() ? nullptr : o.out_dir.c_str(), &s);
  if (rc == FF_OK) {
    std::printf("episodes: %" PRId64 "\n", s.episodes);
    std::printf("success_rate: %.6f\n", s.success_rate);
    std::printf("endpoint_error: %.6f\n", s.endpoint_error_mean);
    std::printf("atv: %.6f expert: %.6f gap: %.6f\n", s.atv_mean, s.atv_expert_mean, s.atv_gap);
    std::printf("ts_score: %.6f\n", s.ts_score_mean);
    std::printf("nfe_per_decision: %.3f\n", s.nfe_per_decision);
  }
  return report(rc);
}

struct VerifyOpts {
  std::string only;
  uint64_t seed = 4242;
  std::string report_path;
  bool quiet = false;
};

int do_verify(const VerifyOpts& o) {
  int all_pass = 0;
  int rc = ff_verify(o.only.empty() ? nullptr : o.only.c_str(), o.seed,
                     o.report_path.empty() ? nullptr : o.report_path.c_str(), o.quiet ? 1 : 0,
                     &all_pass);
  if (rc != FF_OK) return report(rc);
  return all_pass ? 0 : 1;
}

struct SweepOpts {
  std::string grid;
  std::string out_dir;
};

int do_sweep(const SweepOpts& o) {
  char dir[4096];
  int rc = ff_sweep(o.grid.c_str(), o.out_dir.empty() ? nullptr : o.out_dir.c_str(), dir,
                    sizeof(dir));
  if (rc == FF_OK) std::printf("sweep dir: %s\n", dir);
  return report(rc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(ff_version()) +
               " - consistency flow training on synthetic trajectory tasks"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate an expert demonstration file");
  gen_cmd->add_option("--task", gen.task, "Task id: lissajous, reach, pick-sketch")
      ->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Number of episodes")->capture_default_str();
  gen_cmd->add_option("--length", gen.length, "Steps per episode")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output path (default <out root>/demos.jsonl)");

  TrainOpts train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a policy from a config file");
  train_cmd->add_option("--config", train.config, "Key-value config file")->required();
  train_cmd->add_option("--variant", train.variant,
                        "Objective preset; also selects its anchor distribution");
  train_cmd->add_option("--set", train.sets, "Override a config key, e.g. objective.lambda=1e-3")
      ->type_size(1)
      ->allow_extra_args(false);
  train_cmd->add_option("--out-dir", train.out_dir, "Run directory (default derived from config)");
  train_cmd->add_flag("--resume", train.resume, "Continue from the run directory's checkpoint");

  EvalOpts eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Roll a checkpoint out against demos");
  eval_cmd->add_option("--ckpt", eval.ckpt, "Checkpoint file")->required();
  eval_cmd->add_option("--demos", eval.demos, "Demo file")->required();
  eval_cmd->add_option("--mode", eval.mode, "open_loop or closed_loop")->capture_default_str();
  eval_cmd->add_option("--episodes", eval.episodes, "Episode count")->capture_default_str();
  eval_cmd->add_option("--euler-steps", eval.euler_steps,
                       "0 = single-evaluation inference, >0 = Euler steps")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Noise seed")->capture_default_str();
  eval_cmd->add_option("--out-dir", eval.out_dir, "Report directory (default <out root>/eval)");

  VerifyOpts verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the numerical verification suite");
  verify_cmd->add_option("--only", verify.only, "Comma-separated subset of check names");
  verify_cmd->add_option("--seed", verify.seed, "Suite seed")->capture_default_str();
  verify_cmd->add_option("--report", verify.report_path,
                         "JSON report path (default <out root>/verify_report.json)");
  verify_cmd->add_flag("--quiet", verify.quiet, "Suppress per-check lines");

  SweepOpts sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a grid of training runs");
  sweep_cmd->add_option("--grid", sweep.grid, "Sweep description file")->required();
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Sweep directory (default <out root>/sweep)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return FF_ERR_CONFIG;
  }

  if (gen_cmd->parsed()) return do_gen(gen);
  if (train_cmd->parsed()) return do_train(train);
  if (eval_cmd->parsed()) return do_eval(eval);
  if (verify_cmd->parsed()) return do_verify(verify);
  if (sweep_cmd->parsed()) return do_sweep(sweep);
  return FF_ERR_CONFIG;
}
