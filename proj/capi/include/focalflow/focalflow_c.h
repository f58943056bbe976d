#ifndef FOCALFLOW_C_H
#define FOCALFLOW_C_H

/* C interface to the focalflow core. Every entry point returns one of the
 * FF_* status codes below; on failure ff_last_error() carries a message for
 * the calling thread. No focalflow call throws across this boundary. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FF_API __declspec(dllexport)
#else
#define FF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  FF_OK = 0,
  FF_ERR_RUNTIME = 1, /* I/O, numerics, internal invariant failures */
  FF_ERR_CONFIG = 2   /* bad arguments, malformed config or file contents */
};

FF_API const char* ff_version(void);

/* Message for the most recent failing call on this thread. Never NULL.
 * Owned by the library; valid until the next failing call. */
FF_API const char* ff_last_error(void);

/* Generates an expert demo file. task is one of "lissajous", "reach",
 * "pick-sketch". out_path may be NULL for the default location under the
 * output root. The resolved path is written to path_buf when non-NULL. */
FF_API int ff_gen_demos(const char* task, int count, int length, uint64_t seed,
                        const char* out_path, char* path_buf, size_t path_cap);

typedef struct ff_train_summary {
  int64_t steps;
  double top5_success;
  double closed_success;
  double closed_endpoint_error;
  double open_endpoint_error;
} ff_train_summary;

/* Runs training from a key-value config file. variant may be NULL or "" to
 * use the config's own objective; sets is an array of "key=value" override
 * strings applied after the variant preset. out_dir NULL selects the default
 * run directory; resume nonzero continues from its checkpoint. */
FF_API int ff_train(const char* config_path, const char* variant,
                    const char* const* sets, size_t n_sets, const char* out_dir,
                    int resume, ff_train_summary* summary, char* run_dir_buf,
                    size_t run_dir_cap);

typedef struct ff_eval_summary {
  int64_t episodes;
  double success_rate;
  double endpoint_error_mean;
  double atv_mean;
  double atv_expert_mean;
  double atv_gap;
  double ts_score_mean;
  double nfe_per_decision;
} ff_eval_summary;

/* Rolls a checkpoint out against a demo file. mode is "open_loop" or
 * "closed_loop". euler_steps 0 selects single-evaluation inference, a
 * positive count selects Euler integration with that many evaluations.
 * CSV reports land in out_dir (NULL for the default). */
FF_API int ff_eval(const char* ckpt_path, const char* demos_path,
                   const char* mode, int episodes, int euler_steps,
                   uint64_t seed, const char* out_dir, ff_eval_summary* summary);

/* Runs the numerical verification suite. only_csv is a comma-separated
 * subset of check names, NULL or "" for all. Prints one line per check when
 * quiet is zero and writes a JSON report to report_path (NULL for the
 * default). *all_pass is set to 1 iff every check passed. */
FF_API int ff_verify(const char* only_csv, uint64_t seed,
                     const char* report_path, int quiet, int* all_pass);

/* Runs a grid of training runs described by a sweep file. Writes one run
 * directory per grid point plus summary.csv under out_dir. */
FF_API int ff_sweep(const char* grid_path, const char* out_dir, char* dir_buf,
                    size_t dir_cap);

/* Single-decision inference handle around a trained checkpoint. */
typedef struct ff_policy ff_policy;

FF_API int ff_policy_open(const char* ckpt_path, ff_policy** out);
FF_API void ff_policy_close(ff_policy* policy);

/* Geometry of the open handle; 0 on NULL. */
FF_API int ff_policy_obs_dim(const ff_policy* policy);
FF_API int ff_policy_horizon(const ff_policy* policy);
FF_API int ff_policy_action_dim(const ff_policy* policy);

/* One decision: obs holds obs_dim raw observation values, actions_out
 * receives horizon * action_dim denormalized action values (row-major,
 * horizon rows). noise_seed drives the latent draw; equal seeds give
 * bitwise-equal actions. */
FF_API int ff_policy_infer(ff_policy* policy, const double* obs, size_t obs_len,
                           uint64_t noise_seed, double* actions_out,
                           size_t actions_cap);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FOCALFLOW_C_H */
