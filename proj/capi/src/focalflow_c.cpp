#include "focalflow/focalflow_c.h"

#include <cstring>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "focalflow/errors.hpp"
#include "focalflow/experiments.hpp"
#include "focalflow/flow.hpp"
#include "focalflow/training.hpp"

namespace {

thread_local std::string g_last_error = "no error";

void set_error(const std::string& msg) { g_last_error = msg; }

// ConfigError and invalid_argument mean the caller handed us something wrong;
// everything else is an internal or environmental failure.
int guard(const std::function<void()>& body) {
  try {
    body();
    return FF_OK;
  } catch (const focalflow::ConfigError& e) {
    set_error(e.what());
    return FF_ERR_CONFIG;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return FF_ERR_CONFIG;
  } catch (const std::exception& e) {
    set_error(e.what());
    return FF_ERR_RUNTIME;
  } catch (...) {
    set_error("unknown error");
    return FF_ERR_RUNTIME;
  }
}

void copy_out(const std::string& s, char* buf, size_t cap) {
  if (buf == nullptr || cap == 0) return;
  if (s.size() + 1 > cap) throw focalflow::ConfigError("output buffer too small: need " +
                                                       std::to_string(s.size() + 1) + " bytes");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

std::string opt(const char* s) { return s == nullptr ? std::string() : std::string(s); }

}  // namespace

extern "C" {

const char* ff_version(void) { return "focalflow 0.1.0"; }

const char* ff_last_error(void) { return g_last_error.c_str(); }

int ff_gen_demos(const char* task, int count, int length, uint64_t seed, const char* out_path,
                 char* path_buf, size_t path_cap) {
  return guard([&] {
    focalflow::GenArgs args;
    if (task != nullptr) args.task = task;
    args.count = count;
    args.length = length;
    args.seed = seed;
    args.out = opt(out_path);
    std::filesystem::path written = focalflow::run_gen(args);
    copy_out(written.string(), path_buf, path_cap);
  });
}

int ff_train(const char* config_path, const char* variant, const char* const* sets, size_t n_sets,
             const char* out_dir, int resume, ff_train_summary* summary, char* run_dir_buf,
             size_t run_dir_cap) {
  return guard([&] {
    focalflow::TrainArgs args;
    args.config_path = opt(config_path);
    args.variant = opt(variant);
    for (size_t i = 0; i < n_sets; ++i) {
      if (sets == nullptr || sets[i] == nullptr) throw focalflow::ConfigError("null override string");
      args.sets.emplace_back(sets[i]);
    }
    args.out_dir = opt(out_dir);
    args.resume = resume != 0;
    focalflow::TrainOutcome out = focalflow::run_train(args);
    if (summary != nullptr) {
      summary->steps = out.result.steps;
      summary->top5_success = out.result.top5_success;
      summary->closed_success = out.result.final_closed.success_rate;
      summary->closed_endpoint_error = out.result.final_closed.endpoint_error_mean;
      summary->open_endpoint_error = out.result.final_open.endpoint_error_mean;
    }
    copy_out(out.run_dir.string(), run_dir_buf, run_dir_cap);
  });
}

int ff_eval(const char* ckpt_path, const char* demos_path, const char* mode, int episodes,
            int euler_steps, uint64_t seed, const char* out_dir, ff_eval_summary* summary) {
  return guard([&] {
    focalflow::EvalArgs args;
    args.ckpt = opt(ckpt_path);
    args.demos = opt(demos_path);
    if (mode != nullptr && *mode != '\0') args.mode = mode;
    args.episodes = episodes;
    args.euler_steps = euler_steps;
    args.seed = seed;
    args.out_dir = opt(out_dir);
    focalflow::EvalAggregate agg = focalflow::run_eval(args);
    if (summary != nullptr) {
      summary->episodes = agg.episodes;
      summary->success_rate = agg.success_rate;
      summary->endpoint_error_mean = agg.endpoint_error_mean;
      summary->atv_mean = agg.atv_mean;
      summary->atv_expert_mean = agg.atv_expert_mean;
      summary->atv_gap = agg.atv_gap;
      summary->ts_score_mean = agg.ts_score_mean;
      summary->nfe_per_decision = agg.nfe_per_decision;
    }
  });
}

int ff_verify(const char* only_csv, uint64_t seed, const char* report_path, int quiet,
              int* all_pass) {
  return guard([&] {
    focalflow::VerifyArgs args;
    std::string only = opt(only_csv);
    std::stringstream ss(only);
    std::string name;
    while (std::getline(ss, name, ',')) {
      size_t b = name.find_first_not_of(" \t");
      size_t e = name.find_last_not_of(" \t");
      if (b != std::string::npos) args.only.push_back(name.substr(b, e - b + 1));
    }
    args.seed = seed;
    args.report_path = opt(report_path);
    args.quiet = quiet != 0;
    bool ok = focalflow::run_verify(args);
    if (all_pass != nullptr) *all_pass = ok ? 1 : 0;
  });
}

int ff_sweep(const char* grid_path, const char* out_dir, char* dir_buf, size_t dir_cap) {
  return guard([&] {
    focalflow::SweepArgs args;
    args.grid_path = opt(grid_path);
    args.out_dir = opt(out_dir);
    std::filesystem::path out = focalflow::run_sweep(args);
    copy_out(out.string(), dir_buf, dir_cap);
  });
}

struct ff_policy {
  focalflow::Checkpoint ck;
  std::unique_ptr<focalflow::VelocityField> net;
  std::unique_ptr<focalflow::OneStepPolicy> policy;
};

int ff_policy_open(const char* ckpt_path, ff_policy** out) {
  if (out == nullptr) {
    set_error("ff_policy_open: out is null");
    return FF_ERR_CONFIG;
  }
  *out = nullptr;
  return guard([&] {
    if (ckpt_path == nullptr) throw focalflow::ConfigError("ff_policy_open: path is null");
    auto handle = std::make_unique<ff_policy>();
    handle->ck = focalflow::load_checkpoint(ckpt_path);
    if (handle->ck.oracle)
      throw focalflow::ConfigError("checkpoint is an oracle fixture, not a trained policy");
    handle->net = std::make_unique<focalflow::VelocityField>(handle->ck.mlp_config());
    handle->net->params().unflatten(handle->ck.live);
    handle->policy = std::make_unique<focalflow::OneStepPolicy>(
        *handle->net, handle->net->params(), handle->ck.norm, handle->ck.chunk_size,
        handle->ck.num_chunks, handle->ck.n_obs);
    *out = handle.release();
  });
}

void ff_policy_close(ff_policy* policy) { delete policy; }

int ff_policy_obs_dim(const ff_policy* policy) {
  return policy == nullptr ? 0 : policy->ck.n_obs * policy->ck.action_dim;
}

int ff_policy_horizon(const ff_policy* policy) {
  return policy == nullptr ? 0 : policy->policy->horizon();
}

int ff_policy_action_dim(const ff_policy* policy) {
  return policy == nullptr ? 0 : policy->ck.action_dim;
}

int ff_policy_infer(ff_policy* policy, const double* obs, size_t obs_len, uint64_t noise_seed,
                    double* actions_out, size_t actions_cap) {
  return guard([&] {
    if (policy == nullptr) throw focalflow::ConfigError("ff_policy_infer: policy is null");
    size_t want_obs = static_cast<size_t>(ff_policy_obs_dim(policy));
    if (obs == nullptr || obs_len != want_obs)
      throw focalflow::ConfigError("ff_policy_infer: expected " + std::to_string(want_obs) +
                                   " observation values, got " + std::to_string(obs_len));
    size_t want_act = static_cast<size_t>(policy->policy->horizon()) *
                      static_cast<size_t>(policy->ck.action_dim);
    if (actions_out == nullptr || actions_cap < want_act)
      throw focalflow::ConfigError("ff_policy_infer: actions buffer holds " +
                                   std::to_string(actions_cap) + " values, need " +
                                   std::to_string(want_act));
    focalflow::Observation raw;
    raw.values.assign(obs, obs + obs_len);
    focalflow::Rng noise(noise_seed);
    focalflow::Mat actions = policy->policy->predict(raw, 0, noise);
    std::memcpy(actions_out, actions.v.data(), want_act * sizeof(double));
  });
}

}  // extern "C"
