#ifndef ECOFARM_H
#define ECOFARM_H

/*
 * C interface to the ecofarm library: Erlang-A queue analysis, staffing
 * policies, arrival-rate estimation, and the server-farm simulator.
 *
 * Every fallible call returns an ecofarm_status. On failure a description
 * of the most recent error on the calling thread is available from
 * ecofarm_last_error() until the next failing call on that thread.
 * Handles are opaque; release each with its matching *_free function.
 * Strings returned by accessors stay valid for the lifetime of the handle.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ECOFARM_BUILDING_LIBRARY)
#    define ECOFARM_API __declspec(dllexport)
#  else
#    define ECOFARM_API __declspec(dllimport)
#  endif
#else
#  define ECOFARM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ecofarm_status {
    ECOFARM_OK = 0,
    ECOFARM_INVALID_PARAMETER = 1,
    ECOFARM_UNSTABLE = 2,
    ECOFARM_MISMATCH = 3,
    ECOFARM_INSUFFICIENT_HISTORY = 4,
    ECOFARM_EMPTY_TRACE = 5,
    ECOFARM_PARSE_ERROR = 6,
    ECOFARM_NON_UNIFORM_BINNING = 7,
    ECOFARM_NEGATIVE_COUNT = 8,
    ECOFARM_IO_ERROR = 9,
    ECOFARM_CONFIG_ERROR = 10,
    ECOFARM_WORKLOAD_EXHAUSTED = 11,
    ECOFARM_INTERNAL_ERROR = 12
} ecofarm_status;

ECOFARM_API const char* ecofarm_last_error(void);
ECOFARM_API const char* ecofarm_status_string(ecofarm_status status);
ECOFARM_API const char* ecofarm_version(void);

/* ---- queue analysis ------------------------------------------------------ */

typedef struct ecofarm_queue_params {
    double arrival_rate; /* lambda, jobs/s */
    double service_rate; /* mu, jobs/s per server */
    double abandon_rate; /* theta, 1/s per waiting job */
    int64_t servers;     /* n */
} ecofarm_queue_params;

typedef struct ecofarm_metrics {
    double p_abandon;
    double p_wait;
    double mean_in_system;
    double mean_queue;
    double mean_wait_served;
    double throughput;
    double utilization;
} ecofarm_metrics;

/* tolerance <= 0 selects the default truncation tolerance (1e-12). */
ECOFARM_API ecofarm_status ecofarm_analyze(const ecofarm_queue_params* params, double tolerance,
                                           ecofarm_metrics* out);

/* Fills `probs` with up to `capacity` occupancy probabilities; `*length`
 * receives the full distribution length (truncation level + 1). */
ECOFARM_API ecofarm_status ecofarm_steady_state(const ecofarm_queue_params* params, double tolerance,
                                                double* probs, size_t capacity, size_t* length);

ECOFARM_API ecofarm_status ecofarm_erlang_c(double arrival_rate, double service_rate, int64_t servers,
                                            double* p_wait);

/* ---- economics ----------------------------------------------------------- */

typedef struct ecofarm_economics {
    double reward_per_job;
    double electricity_price; /* per kWh */
    double peak_power;        /* W */
    double idle_fraction;
    double setup_power;       /* W; negative means "same as peak_power" */
    double setup_duration;    /* s */
    double abandon_penalty;
} ecofarm_economics;

ECOFARM_API void ecofarm_economics_defaults(ecofarm_economics* out);

/* Overlay the fields present in a JSON economics file onto *econ. */
ECOFARM_API ecofarm_status ecofarm_economics_load(const char* path, ecofarm_economics* econ);

ECOFARM_API ecofarm_status ecofarm_net_revenue_rate(const ecofarm_queue_params* params,
                                                    const ecofarm_economics* econ, double* out);

/* ---- staffing ------------------------------------------------------------ */

typedef struct ecofarm_staffing {
    int64_t target_servers;
    double predicted_revenue_rate; /* -inf when the queue is unstable there */
} ecofarm_staffing;

ECOFARM_API ecofarm_status ecofarm_staff_qed(double rate, double service_rate, double beta,
                                             const ecofarm_economics* econ_or_null, double abandon_rate,
                                             ecofarm_staffing* out);

ECOFARM_API ecofarm_status ecofarm_staff_adaptive(double rate, double service_rate, double abandon_rate,
                                                  const ecofarm_economics* econ, int64_t max_servers,
                                                  ecofarm_staffing* out);

ECOFARM_API ecofarm_status ecofarm_staff_static(int64_t servers, double rate, double service_rate,
                                                double abandon_rate, const ecofarm_economics* econ_or_null,
                                                ecofarm_staffing* out);

/* ---- traces -------------------------------------------------------------- */

typedef struct ecofarm_trace ecofarm_trace;

ECOFARM_API ecofarm_status ecofarm_trace_load_binned(const char* path, ecofarm_trace** out);
ECOFARM_API ecofarm_status ecofarm_trace_aggregate_log(const char* path, double bin_width, ecofarm_trace** out);
/* Noise-free when use_noise is 0, otherwise Poisson counts seeded by noise_seed. */
ECOFARM_API ecofarm_status ecofarm_trace_synthesize_diurnal(double base_rate, double amplitude, double period,
                                                            double bin_width, size_t bins, int use_noise,
                                                            uint64_t noise_seed, ecofarm_trace** out);
ECOFARM_API ecofarm_status ecofarm_trace_save_binned(const ecofarm_trace* trace, const char* path);
ECOFARM_API size_t ecofarm_trace_bins(const ecofarm_trace* trace);
ECOFARM_API double ecofarm_trace_bin_width(const ecofarm_trace* trace);
ECOFARM_API double ecofarm_trace_start_time(const ecofarm_trace* trace);
ECOFARM_API uint64_t ecofarm_trace_count(const ecofarm_trace* trace, size_t bin);
ECOFARM_API void ecofarm_trace_free(ecofarm_trace* trace);

/* ---- estimators ---------------------------------------------------------- */

typedef struct ecofarm_estimator_report {
    size_t scored_bins;
    size_t warmup_bins;
    double mape_percent;
    double rmse;
    double mean_bias;
} ecofarm_estimator_report;

/* `estimator` uses the compact form: oracle:R, window:W, ewma:A, trend:W,
 * margin:K:<base>. */
ECOFARM_API ecofarm_status ecofarm_estimator_evaluate(const ecofarm_trace* trace, const char* estimator,
                                                      ecofarm_estimator_report* out);

/* Rate forecast for the bin that follows the trace. */
ECOFARM_API ecofarm_status ecofarm_estimator_forecast(const ecofarm_trace* trace, const char* estimator,
                                                      double* rate);

/* ---- one-shot scenarios ------------------------------------------------- */

/* Optional fields from a config file; each has_* flag says whether the file
 * set the value. `policy` is empty when staffing.policy is absent. */
typedef struct ecofarm_scenario {
    int has_arrival_rate;
    double arrival_rate;
    int has_service_rate;
    double service_rate;
    int has_abandon_rate;
    double abandon_rate;
    int has_servers;
    int64_t servers;
    int has_tolerance;
    double tolerance;
    char policy[16];
    int has_beta;
    double beta;
    int has_max_servers;
    int64_t max_servers;
    int has_static_servers;
    int64_t static_servers;
    ecofarm_economics economics;
} ecofarm_scenario;

/* Clears every has_* flag and sets default economics. */
ECOFARM_API void ecofarm_scenario_init(ecofarm_scenario* out);
/* Overlays the file onto *scenario. */
ECOFARM_API ecofarm_status ecofarm_scenario_load(const char* path, ecofarm_scenario* scenario);

/* ---- experiments --------------------------------------------------------- */

typedef struct ecofarm_experiment ecofarm_experiment;
typedef struct ecofarm_results ecofarm_results;

ECOFARM_API ecofarm_status ecofarm_experiment_load(const char* path, ecofarm_experiment** out);
ECOFARM_API void ecofarm_experiment_set_seed(ecofarm_experiment* exp, uint64_t seed);
ECOFARM_API ecofarm_status ecofarm_experiment_set_reps(ecofarm_experiment* exp, size_t reps);
ECOFARM_API size_t ecofarm_experiment_policy_count(const ecofarm_experiment* exp);
ECOFARM_API const char* ecofarm_experiment_policy_name(const ecofarm_experiment* exp, size_t index);
/* Estimator of a policy in compact form. */
ECOFARM_API const char* ecofarm_experiment_policy_estimator(const ecofarm_experiment* exp, size_t index);
/* Output directory named by the file, or "" when it names none. */
ECOFARM_API const char* ecofarm_experiment_output_dir(const ecofarm_experiment* exp);
/* Copy of the workload trace; ECOFARM_CONFIG_ERROR for a stationary workload. */
ECOFARM_API ecofarm_status ecofarm_experiment_trace(const ecofarm_experiment* exp, ecofarm_trace** out);
ECOFARM_API void ecofarm_experiment_free(ecofarm_experiment* exp);

/* Runs one named policy, or all of them when policy_name is NULL. */
ECOFARM_API ecofarm_status ecofarm_experiment_run(const ecofarm_experiment* exp, const char* policy_name,
                                                  ecofarm_results** out);

/* Summary table; significant_digits 0 gives full precision. */
ECOFARM_API const char* ecofarm_results_summary(ecofarm_results* results, int significant_digits);
ECOFARM_API ecofarm_status ecofarm_results_write(const ecofarm_results* results, const char* dir);
ECOFARM_API void ecofarm_results_free(ecofarm_results* results);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ECOFARM_H */
