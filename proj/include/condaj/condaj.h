#ifndef CONDAJ_H
#define CONDAJ_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(CONDAJ_BUILDING_LIBRARY)
#define CJ_API __attribute__((visibility("default")))
#else
#define CJ_API
#endif

typedef enum cj_status {
    CJ_OK = 0,
    CJ_ERR_INVALID_ARGUMENT = 1,
    CJ_ERR_NO_KERNEL_MASS = 2,
    CJ_ERR_PARSE = 3,
    CJ_ERR_VALIDATION = 4,
    CJ_ERR_IO = 5,
    CJ_ERR_CHECK_FAILED = 6,
    CJ_ERR_INTERNAL = 7
} cj_status;

typedef struct cj_sample cj_sample;
typedef struct cj_options cj_options;
typedef struct cj_fit cj_fit;
typedef struct cj_config cj_config;

typedef void (*cj_message_fn)(const char* line, void* user);

/* Message of the last failed call on this thread ("" if none). */
CJ_API const char* cj_last_error(void);
CJ_API const char* cj_version(void);
CJ_API const char* cj_status_name(cj_status status);

/* Samples. */
CJ_API cj_status cj_sample_load(const char* path, cj_sample** out);
CJ_API cj_status cj_sample_parse(const char* csv_text, cj_sample** out);
/* scenario_json NULL selects the built-in illness-death scenario; n = 0
   keeps the scenario's n. */
CJ_API cj_status cj_sample_simulate(const char* scenario_json, size_t n, uint64_t seed, cj_sample** out);
CJ_API cj_status cj_sample_write(const cj_sample* sample, const char* path);
CJ_API size_t cj_sample_size(const cj_sample* sample);
CJ_API size_t cj_sample_dimension(const cj_sample* sample);
CJ_API size_t cj_sample_state_count(const cj_sample* sample);
CJ_API cj_status cj_sample_state_label(const cj_sample* sample, size_t index, int* out);
CJ_API void cj_sample_free(cj_sample* sample);

/* Fit options; dimensions are 0-based. */
CJ_API cj_status cj_options_create(cj_options** out);
CJ_API cj_status cj_options_set_kernel(cj_options* options, const char* name);
CJ_API cj_status cj_options_set_eta(cj_options* options, double eta);
/* a <= 0 restores the bandwidth schedule. */
CJ_API cj_status cj_options_set_bandwidth(cj_options* options, double a);
CJ_API cj_status cj_options_set_epsilon(cj_options* options, double epsilon);
/* theta <= 0 restores the default horizon. */
CJ_API cj_status cj_options_set_theta(cj_options* options, double theta);
CJ_API cj_status cj_options_set_atoms(cj_options* options, size_t dim, const double* values, size_t count);
CJ_API void cj_options_free(cj_options* options);

/* Conditional Nelson-Aalen and Aalen-Johansen fit at covariate point x. */
CJ_API cj_status cj_fit_compute(const cj_sample* sample, const cj_options* options, const double* x, size_t dim,
                                cj_fit** out);
CJ_API size_t cj_fit_time_count(const cj_fit* fit);
CJ_API const double* cj_fit_times(const cj_fit* fit);
CJ_API double cj_fit_bandwidth(const cj_fit* fit);
CJ_API double cj_fit_theta(const cj_fit* fit);
CJ_API size_t cj_fit_state_count(const cj_fit* fit);
/* Occupation probabilities at t, one per state in label order. */
CJ_API cj_status cj_fit_occupation(const cj_fit* fit, double t, double* out, size_t states);
CJ_API cj_status cj_fit_cumulative_hazard(const cj_fit* fit, double t, int from, int to, double* out);
CJ_API cj_status cj_fit_floor_active_count(const cj_fit* fit, int state, size_t* out);
/* Writes <stem>_hazard.csv, <stem>_occupation.csv and <stem>.json. */
CJ_API cj_status cj_fit_write(const cj_fit* fit, const char* dir, const char* stem);
/* Plug-in covariance surfaces of the fit on a grid_size quantile grid. */
CJ_API cj_status cj_fit_write_covariance(const cj_sample* sample, const cj_fit* fit, size_t grid_size,
                                         const char* dir, const char* stem);
CJ_API void cj_fit_free(cj_fit* fit);

/* Command configuration, mirroring the command-line flags. */
CJ_API cj_status cj_config_create(cj_config** out);
CJ_API cj_status cj_config_set_input(cj_config* config, const char* path);
CJ_API cj_status cj_config_set_out(cj_config* config, const char* dir);
CJ_API cj_status cj_config_add_x(cj_config* config, const double* x, size_t dim);
CJ_API cj_status cj_config_add_atoms(cj_config* config, size_t dim, const double* values, size_t count);
CJ_API cj_status cj_config_set_kernel(cj_config* config, const char* name);
CJ_API cj_status cj_config_set_eta(cj_config* config, double eta);
CJ_API cj_status cj_config_set_bandwidth(cj_config* config, double a);
CJ_API cj_status cj_config_set_epsilon(cj_config* config, double epsilon);
CJ_API cj_status cj_config_set_theta(cj_config* config, double theta);
CJ_API cj_status cj_config_set_grid(cj_config* config, size_t grid);
CJ_API cj_status cj_config_set_seed(cj_config* config, uint64_t seed);
CJ_API cj_status cj_config_set_threads(cj_config* config, size_t threads);
CJ_API cj_status cj_config_set_scenario(cj_config* config, const char* path);
CJ_API cj_status cj_config_set_n(cj_config* config, size_t n);
CJ_API cj_status cj_config_set_quick(cj_config* config, int quick);
CJ_API cj_status cj_config_set_message_callback(cj_config* config, cj_message_fn fn, void* user);
CJ_API void cj_config_free(cj_config* config);

CJ_API cj_status cj_cmd_simulate(const cj_config* config);
CJ_API cj_status cj_cmd_fit(const cj_config* config);
CJ_API cj_status cj_cmd_covariance(const cj_config* config);
/* CJ_ERR_CHECK_FAILED when any criterion fails. */
CJ_API cj_status cj_cmd_check(const cj_config* config);

#ifdef __cplusplus
}
#endif

#endif
