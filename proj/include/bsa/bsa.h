/*
 Copyright 2026 The BSA Toolkit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

/*
 * C API of the bi-stiffness actuator toolkit.
 *
 * All functions return a bsa_status code (BSA_OK on success); the thread-local
 * message from bsa_last_error() describes the most recent failure. Opaque
 * handles own their resources and are released with the matching _free call.
 * Configuration strings are JSON documents; their schemas are described in
 * the project README.
 */

#ifndef BSA_BSA_H
#define BSA_BSA_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef BSA_API
#define BSA_API __attribute__((visibility("default")))
#endif

typedef enum bsa_status {
    BSA_OK = 0,
    BSA_ERR_INVALID_ARGUMENT = 1, /* null handle, bad enum, ... */
    BSA_ERR_CONFIG = 2,           /* malformed config, parameter file, or input file */
    BSA_ERR_NUMERICAL = 3,        /* non-finite state or numerical breakdown */
    BSA_ERR_SOLVER = 4,           /* optimization did not converge */
    BSA_ERR_PARTIAL = 5,          /* batch finished with per-point failures */
    BSA_ERR_INTERNAL = 6
} bsa_status;

typedef struct bsa_params bsa_params;
typedef struct bsa_trajectory bsa_trajectory;
typedef struct bsa_solution bsa_solution;

BSA_API const char* bsa_version(void);

/* Thread-local message for the last failing call on this thread. */
BSA_API const char* bsa_last_error(void);

/* --- parameter sets -------------------------------------------------------- */

/* Built-in defaults (the prototype's parameter set). */
BSA_API bsa_status bsa_params_create(bsa_params** out);
/* key = value parameter file; see README for the schema. */
BSA_API bsa_status bsa_params_load(const char* path, bsa_params** out);
BSA_API bsa_status bsa_params_save(const bsa_params* params, const char* path);
BSA_API bsa_status bsa_params_get(const bsa_params* params, const char* key, double* out);
BSA_API bsa_status bsa_params_set(bsa_params* params, const char* key, double value);
BSA_API void bsa_params_free(bsa_params* params);

/* --- simulation ------------------------------------------------------------ */

/* Runs a schedule described by a simulate-config JSON document. */
BSA_API bsa_status bsa_simulate(const bsa_params* params, const char* config_json,
                                bsa_trajectory** out);

BSA_API bsa_status bsa_trajectory_sample_count(const bsa_trajectory* traj, size_t* out);
BSA_API bsa_status bsa_trajectory_event_count(const bsa_trajectory* traj, size_t* out);
/* state = [t, theta, psi, q, psi_dot, q_dot, h]; mode_id in 0..3. */
BSA_API bsa_status bsa_trajectory_sample(const bsa_trajectory* traj, size_t index,
                                         double state[7], int* mode_id);
BSA_API bsa_status bsa_trajectory_write_csv(const bsa_trajectory* traj, const char* samples_path,
                                            const char* events_path);
BSA_API void bsa_trajectory_free(bsa_trajectory* traj);

/* --- trajectory optimization ------------------------------------------------ */

/* Solves the OCP described by an optimize-config JSON document. Returns
 * BSA_ERR_SOLVER (with the best solution in *out when non-null) if the solver
 * did not converge. */
BSA_API bsa_status bsa_optimize(const bsa_params* params, const char* config_json,
                                bsa_solution** out);

BSA_API bsa_status bsa_solution_objective(const bsa_solution* sol, double* out);
BSA_API bsa_status bsa_solution_final_qdot(const bsa_solution* sol, double* out);
BSA_API bsa_status bsa_solution_phase_count(const bsa_solution* sol, size_t* out);
BSA_API bsa_status bsa_solution_duration(const bsa_solution* sol, size_t phase, double* out);
BSA_API bsa_status bsa_solution_converged(const bsa_solution* sol, int* out);
/* Open-loop replay through the exact dynamics. */
BSA_API bsa_status bsa_solution_replay(const bsa_solution* sol, const bsa_params* params,
                                       double dt, bsa_trajectory** out);
BSA_API void bsa_solution_free(bsa_solution* sol);

/* --- one-shot commands (run + write artifacts + manifest) -------------------- */

BSA_API bsa_status bsa_cmd_simulate(const bsa_params* params, const char* config_json,
                                    const char* out_dir);
BSA_API bsa_status bsa_cmd_optimize(const bsa_params* params, const char* config_json,
                                    const char* out_dir);
BSA_API bsa_status bsa_cmd_sweep_final_time(const bsa_params* params, const char* config_json,
                                            const char* out_dir);
BSA_API bsa_status bsa_cmd_sweep_initial_angle(const bsa_params* params, const char* config_json,
                                               const char* out_dir);
BSA_API bsa_status bsa_cmd_identify(const bsa_params* params, const char* config_json,
                                    const char* out_dir);
BSA_API bsa_status bsa_cmd_energy(const bsa_params* params, const char* config_json,
                                  const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BSA_BSA_H */
