/* Stable C interface to the jobsched library.
 *
 * Every fallible call returns a jobsched_status. On failure the message is
 * available from jobsched_last_error() on the same thread until the next call.
 * Strings handed out through char** parameters are owned by the caller and
 * must be released with jobsched_string_free(). */
#ifndef JOBSCHED_H
#define JOBSCHED_H

#include <stdint.h>

#if defined(_WIN32)
#  if defined(JOBSCHED_BUILDING)
#    define JOBSCHED_API __declspec(dllexport)
#  else
#    define JOBSCHED_API __declspec(dllimport)
#  endif
#else
#  define JOBSCHED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jobsched_status {
  JOBSCHED_OK = 0,
  JOBSCHED_ERR_INVALID_ARGUMENT = 1,
  JOBSCHED_ERR_PARSE = 2,
  JOBSCHED_ERR_IO = 3,
  JOBSCHED_ERR_MODEL = 4,
  JOBSCHED_ERR_NOT_CONVERGED = 5,
  JOBSCHED_ERR_INTERNAL = 99
} jobsched_status;

typedef struct jobsched_instance jobsched_instance;

typedef struct jobsched_summary {
  int node_count;
  int demand_count;
  int stage_count;
  double rho;
  double eta;
  double total_arrival_rate;
  double tau;
} jobsched_summary;

/* Called after each finished instance of a campaign. */
typedef void (*jobsched_progress_fn)(uint64_t done, uint64_t total, void* user);

JOBSCHED_API const char* jobsched_version(void);
JOBSCHED_API const char* jobsched_last_error(void);
JOBSCHED_API void jobsched_string_free(char* text);

/* Instances. The handle owns a validated network. */
JOBSCHED_API jobsched_status jobsched_instance_from_json(const char* json, jobsched_instance** out);
JOBSCHED_API jobsched_status jobsched_instance_load(const char* path, jobsched_instance** out);
/* layout: "two-cluster" or "lattice". */
JOBSCHED_API jobsched_status jobsched_instance_generate(const char* layout, uint64_t seed,
                                                        jobsched_instance** out);
JOBSCHED_API jobsched_status jobsched_instance_to_json(const jobsched_instance* inst, char** out_json);
JOBSCHED_API jobsched_status jobsched_instance_save(const jobsched_instance* inst, const char* path);
JOBSCHED_API jobsched_status jobsched_instance_summary(const jobsched_instance* inst,
                                                       jobsched_summary* out);
JOBSCHED_API void jobsched_instance_free(jobsched_instance* inst);

/* Simulation. policy: "dvo", "kstop:K", "kfroml:K:L:impartial|stratified",
 * "polling" or "slq". For "dvo" warmup and horizon are time units,
 * otherwise steps. The report is a JSON object. */
JOBSCHED_API jobsched_status jobsched_simulate(const jobsched_instance* inst, const char* policy,
                                               uint64_t seed, uint64_t warmup, uint64_t horizon,
                                               char** out_report_json);

/* Relative value iteration on the instance truncated at m jobs per queue.
 * Returns JOBSCHED_ERR_NOT_CONVERGED (with the JSON still filled in) when
 * max_iters is reached first. */
JOBSCHED_API jobsched_status jobsched_dp_solve(const jobsched_instance* inst, int m, double tol,
                                               int64_t max_iters, char** out_json);

/* Feasibility escalation. limits_json may be NULL for the defaults, or an
 * object with any of: state_limit, time_limit_seconds, epsilon, tolerance,
 * max_iters, start_m, step_m, max_demand. */
JOBSCHED_API jobsched_status jobsched_dp_feasibility(const jobsched_instance* inst,
                                                     const char* limits_json, char** out_json);

/* Campaign described by a JSON object: layout, max_demand, instances, seed,
 * policies, warmup, horizon, solve_dp, limits, workers, output. Writes the
 * results CSV to "output" and returns a short JSON summary. */
JOBSCHED_API jobsched_status jobsched_campaign_run(const char* config_json,
                                                   jobsched_progress_fn progress, void* user,
                                                   char** out_summary_json);

/* Aggregates a results CSV. bucket: "none", "n", "rho_band", "eta_band".
 * baseline: a policy label or "dp". Output is CSV text. */
JOBSCHED_API jobsched_status jobsched_aggregate(const char* results_path, const char* bucket,
                                                const char* baseline, char** out_csv);

#ifdef __cplusplus
}
#endif

#endif /* JOBSCHED_H */
