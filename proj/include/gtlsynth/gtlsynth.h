/* C interface to the gtlsynth shared library. Handles are opaque; every call
 * returns a gs_status and leaves a message in gs_last_error() on failure.
 * Strings returned through char** are owned by the caller and released with
 * gs_string_free. */
#ifndef GTLSYNTH_H
#define GTLSYNTH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GS_API __declspec(dllexport)
#else
#define GS_API __attribute__((visibility("default")))
#endif

typedef enum gs_status {
    GS_OK = 0,
    GS_ERR_SCHEMA = 1,
    GS_ERR_STOCHASTICITY = 2,
    GS_ERR_INDEX = 3,
    GS_ERR_PARSE = 4,
    GS_ERR_HORIZON = 5,
    GS_ERR_UNBOUNDED = 6,
    GS_ERR_STATE_CAP = 7,
    GS_ERR_INFEASIBLE = 8,
    GS_ERR_SOLVER = 9,
    GS_ERR_KERNEL_FORM = 10,
    GS_ERR_ARGUMENT = 11,
    GS_ERR_IO = 12,
    GS_ERR_ESCAPE = 13,
    GS_ERR_INTERNAL = 99
} gs_status;

typedef struct gs_instance gs_instance;
typedef struct gs_result gs_result;

GS_API const char* gs_version(void);
/* message of the last failed call on this thread */
GS_API const char* gs_last_error(void);
GS_API void gs_string_free(char* s);

/* DFA of a formula as text; num_states may be NULL */
GS_API gs_status gs_compile(const char* formula, int state_cap, char** dfa_text, int* num_states);

/* model document plus an optional spec document (NULL for none) */
GS_API gs_status gs_instance_load(const char* model_json, const char* specs_json, gs_instance** out);

typedef struct gs_scenario_config {
    const char* kind; /* crop, urban or rescue */
    int agents;
    int rows, cols;
    double epsilon, p, xi, r;
    double lambda;
    double constrained_fraction;
    int initial_state;
    uint64_t seed;
} gs_scenario_config;

GS_API void gs_scenario_config_default(gs_scenario_config* cfg);
GS_API gs_status gs_instance_scenario(const gs_scenario_config* cfg, gs_instance** out);
GS_API int gs_instance_num_agents(const gs_instance* inst);
GS_API gs_status gs_instance_model_json(const gs_instance* inst, char** out);
GS_API gs_status gs_instance_specs_json(const gs_instance* inst, char** out);
GS_API void gs_instance_free(gs_instance* inst);

/* return 0 to stop early */
typedef int (*gs_iteration_cb)(int iteration, double res_p, double res_d, double objective, void* user);

typedef struct gs_synth_options {
    const char* method;    /* monolithic, neighboring, local or admm */
    const char* admm_base; /* neighboring or local */
    double lambda;         /* negative keeps the instance thresholds */
    int horizon;           /* negative uses the formula horizon */
    double beta, gamma;
    int max_iter;
    long long var_cap;
    int coupled_kernels;
    double solver_tol;
    int solver_max_iter;
    gs_iteration_cb on_iteration;
    void* user;
} gs_synth_options;

typedef struct gs_result_info {
    int infeasible;
    double objective;
    int num_vars, num_rows;
    size_t num_nonzeros;
    int iterations;
    int converged;
    double build_seconds, solve_seconds;
    double max_violation, coupling_violation, threshold_slack;
} gs_result_info;

GS_API void gs_synth_options_default(gs_synth_options* opt);
/* An infeasible instance returns GS_ERR_INFEASIBLE and still sets *out. */
GS_API gs_status gs_synthesize(const gs_instance* inst, const gs_synth_options* opt, gs_result** out);
GS_API void gs_result_info_get(const gs_result* res, gs_result_info* info);
GS_API const char* gs_result_formulation(const gs_result* res);
GS_API const char* gs_result_backend(const gs_result* res);
GS_API const char* gs_result_message(const gs_result* res);
GS_API gs_status gs_result_policy_json(const gs_result* res, char** out);
GS_API gs_status gs_result_trace_csv(const gs_result* res, char** out);
GS_API void gs_result_free(gs_result* res);

typedef struct gs_eval_summary {
    int exact;            /* 0 when Monte Carlo was used */
    int horizon;
    double total_reward;
    double total_reward_se;
    double min_probability; /* over constrained agents, 1 when there are none */
    double min_lower;
} gs_eval_summary;

/* mode: exact, mc, or auto (exact unless the joint model exceeds the cap) */
GS_API gs_status gs_evaluate(const gs_instance* inst, const char* policy_json, const char* mode, int runs,
                             uint64_t seed, double confidence, int horizon, char** csv, gs_eval_summary* summary);

/* one line per time index: t followed by the state index of every agent */
GS_API gs_status gs_simulate(const gs_instance* inst, const char* policy_json, int horizon, uint64_t seed,
                             char** out);

#ifdef __cplusplus
}
#endif

#endif
