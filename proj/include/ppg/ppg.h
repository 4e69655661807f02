/* C interface to the particle smoothing library. */
#ifndef PPG_PPG_H
#define PPG_PPG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PPG_API __declspec(dllexport)
#else
#define PPG_API __attribute__((visibility("default")))
#endif

typedef enum ppg_status {
  PPG_OK = 0,
  PPG_INPUT_ERROR = 1,
  PPG_DEGENERATE_WEIGHTS = 2,
  PPG_UNSUPPORTED_MODEL = 3,
  PPG_DOMAIN_ERROR = 4,
  PPG_MODEL_CONTRACT = 5,
  PPG_NUMERICAL_ERROR = 6,
  PPG_IO_ERROR = 7,
  PPG_INTERNAL_ERROR = 99
} ppg_status;

typedef enum ppg_backward_mode {
  PPG_BACKWARD_EXACT = 0,
  PPG_BACKWARD_ACCEPT_REJECT = 1,
  PPG_BACKWARD_AUTO = 2
} ppg_backward_mode;

/* Model with its observation record, bound to the one-lag statistic. */
typedef struct ppg_model ppg_model;

PPG_API const char* ppg_version(void);

/* Message of the last failed call on this thread ("" if none). */
PPG_API const char* ppg_last_error(void);
/* Stable short name of a status code, e.g. "input_error". */
PPG_API const char* ppg_status_name(ppg_status status);

/* model_json: {"type": "lgssm" | "stochvol" | "discrete", ...parameters}. */
PPG_API ppg_status ppg_model_create(const char* model_json, const double* observations, size_t count,
                                    ppg_model** out);
PPG_API void ppg_model_free(ppg_model* model);

/* Simulates x_{0:n}, z_{0:n}; both buffers hold n + 1 doubles (states may be NULL). */
PPG_API ppg_status ppg_simulate(const char* model_json, size_t n, uint64_t seed, double* states,
                                double* observations);

/* PARIS estimate of the smoothed one-lag statistic at horizon n. */
PPG_API ppg_status ppg_run_paris(const ppg_model* model, size_t n, size_t num_particles, size_t backward_draws,
                                 ppg_backward_mode mode, uint64_t seed, double* estimate);

/* FFBSm estimate of the same quantity (O(N^2) per step). */
PPG_API ppg_status ppg_run_ffbsm(const ppg_model* model, size_t n, size_t num_particles, uint64_t seed,
                                 double* estimate);

/* k PPG sweeps from a bootstrap-filter initial path. per_iteration (may be
   NULL) receives k estimates; rollout averages iterations k0+1..k. */
PPG_API ppg_status ppg_run_ppg(const ppg_model* model, size_t n, size_t num_particles, size_t backward_draws,
                               size_t k, size_t k0, ppg_backward_mode mode, uint64_t seed, double* rollout,
                               double* per_iteration);

/* Exact smoothed one-lag statistic (LGSSM and discrete models). */
PPG_API ppg_status ppg_exact_one_lag(const ppg_model* model, size_t n, double* value);

/* Mixing constant rho_n of the model and the contraction rate kappa_{N,n}. */
PPG_API ppg_status ppg_mixing_rho(const ppg_model* model, size_t n, double* rho);
PPG_API ppg_status ppg_kappa(double rho, size_t n, size_t num_particles, double* value);

/* Command-level entry points used by the command-line tool. config_json is an
   experiment file (schema_version 1); files are written to out_dir. */
PPG_API ppg_status ppg_cmd_simulate(const char* config_json, const char* out_dir);
PPG_API ppg_status ppg_cmd_run(const char* config_json, const char* out_dir, size_t threads);
PPG_API ppg_status ppg_cmd_sweep(const char* config_json, const char* out_dir, size_t threads);

/* JSON results; release with ppg_string_free. */
PPG_API ppg_status ppg_cmd_oracle(const char* config_json, char** result_json);
PPG_API ppg_status ppg_cmd_bounds(const char* config_json, size_t ell, char** result_json);
PPG_API void ppg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PPG_PPG_H */
