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

#include "bsa/bsa.h"

#include <memory>
#include <string>

#include "bsa/commands.hpp"
#include "bsa/config.hpp"
#include "bsa/errors.hpp"
#include "bsa/io.hpp"
#include "bsa/params.hpp"
#include "bsa/trajopt.hpp"

struct bsa_params {
    bsa::ActuatorParams value;
};

struct bsa_trajectory {
    bsa::HybridTrajectory value;
    bsa::ActuatorParams params;
    bsa::SpringLaw law = bsa::SpringLaw::Linear;
};

struct bsa_solution {
    bsa::Solution value;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
bsa_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const bsa::ConfigError& e) {
        set_error(e.what());
        return BSA_ERR_CONFIG;
    } catch (const bsa::NumericalError& e) {
        set_error(e.what());
        return BSA_ERR_NUMERICAL;
    } catch (const bsa::SolverError& e) {
        set_error(e.what());
        return BSA_ERR_SOLVER;
    } catch (const bsa::PartialFailure& e) {
        set_error(e.what());
        return BSA_ERR_PARTIAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return BSA_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return BSA_ERR_INTERNAL;
    }
}

bsa_status require(bool ok, const char* message) {
    if (!ok) {
        set_error(message);
        return BSA_ERR_INVALID_ARGUMENT;
    }
    return BSA_OK;
}

} // namespace

extern "C" {

const char* bsa_version(void) { return "0.1.0"; }

const char* bsa_last_error(void) { return g_last_error.c_str(); }

bsa_status bsa_params_create(bsa_params** out) {
    if (bsa_status s = require(out != nullptr, "null output handle")) return s;
    return guarded([&] {
        *out = new bsa_params{};
        return BSA_OK;
    });
}

bsa_status bsa_params_load(const char* path, bsa_params** out) {
    if (bsa_status s = require(path && out, "null argument")) return s;
    return guarded([&] {
        *out = new bsa_params{bsa::load_params(path)};
        return BSA_OK;
    });
}

bsa_status bsa_params_save(const bsa_params* params, const char* path) {
    if (bsa_status s = require(params && path, "null argument")) return s;
    return guarded([&] {
        bsa::save_params(params->value, path);
        return BSA_OK;
    });
}

bsa_status bsa_params_get(const bsa_params* params, const char* key, double* out) {
    if (bsa_status s = require(params && key && out, "null argument")) return s;
    return guarded([&] {
        const auto map = bsa::params_to_key_values(params->value);
        const auto it = map.find(key);
        if (it == map.end()) throw bsa::ConfigError(std::string("unknown parameter key '") + key + "'");
        *out = it->second;
        return BSA_OK;
    });
}

bsa_status bsa_params_set(bsa_params* params, const char* key, double value) {
    if (bsa_status s = require(params && key, "null argument")) return s;
    return guarded([&] {
        auto map = bsa::params_to_key_values(params->value);
        if (!map.count(key)) {
            throw bsa::ConfigError(std::string("unknown parameter key '") + key + "'");
        }
        map[key] = value;
        params->value = bsa::aggregate_params(map);
        return BSA_OK;
    });
}

void bsa_params_free(bsa_params* params) { delete params; }

bsa_status bsa_simulate(const bsa_params* params, const char* config_json, bsa_trajectory** out) {
    if (bsa_status s = require(params && config_json && out, "null argument")) return s;
    return guarded([&] {
        const bsa::SimulateConfig cfg = bsa::parse_simulate_config(config_json);
        auto traj = std::make_unique<bsa_trajectory>();
        traj->value = bsa::execute_schedule(cfg.schedule, cfg.initial_state, cfg.dt,
                                            params->value, cfg.options);
        traj->params = params->value;
        traj->law = cfg.options.law;
        *out = traj.release();
        return BSA_OK;
    });
}

bsa_status bsa_trajectory_sample_count(const bsa_trajectory* traj, size_t* out) {
    if (bsa_status s = require(traj && out, "null argument")) return s;
    *out = traj->value.samples.size();
    return BSA_OK;
}

bsa_status bsa_trajectory_event_count(const bsa_trajectory* traj, size_t* out) {
    if (bsa_status s = require(traj && out, "null argument")) return s;
    *out = traj->value.events.size();
    return BSA_OK;
}

bsa_status bsa_trajectory_sample(const bsa_trajectory* traj, size_t index, double state[7],
                                 int* mode_id) {
    if (bsa_status s = require(traj && state && mode_id, "null argument")) return s;
    if (index >= traj->value.samples.size()) {
        set_error("sample index out of range");
        return BSA_ERR_INVALID_ARGUMENT;
    }
    const auto& sample = traj->value.samples[index];
    state[0] = sample.t;
    state[1] = sample.state.theta;
    state[2] = sample.state.psi;
    state[3] = sample.state.q;
    state[4] = sample.state.psi_dot;
    state[5] = sample.state.q_dot;
    state[6] = sample.state.h;
    *mode_id = static_cast<int>(sample.mode);
    return BSA_OK;
}

bsa_status bsa_trajectory_write_csv(const bsa_trajectory* traj, const char* samples_path,
                                    const char* events_path) {
    if (bsa_status s = require(traj && samples_path && events_path, "null argument")) return s;
    return guarded([&] {
        bsa::write_trajectory_csv(traj->value, traj->params, traj->law, samples_path,
                                  events_path);
        return BSA_OK;
    });
}

void bsa_trajectory_free(bsa_trajectory* traj) { delete traj; }

bsa_status bsa_optimize(const bsa_params* params, const char* config_json, bsa_solution** out) {
    if (bsa_status s = require(params && config_json && out, "null argument")) return s;
    return guarded([&] {
        const bsa::OptimizeConfig cfg = bsa::parse_optimize_config(config_json);
        const bsa::OcpProblem ocp =
            bsa::build_ocp(cfg.plan, params->value, cfg.colloc, cfg.boundary, cfg.path_bounds);
        auto sol = std::make_unique<bsa_solution>();
        sol->value = bsa::solve(ocp);
        const bool converged = sol->value.status == bsa::NlpStatus::Converged;
        *out = sol.release();
        if (!converged) {
            set_error("optimization did not converge");
            return BSA_ERR_SOLVER;
        }
        return BSA_OK;
    });
}

bsa_status bsa_solution_objective(const bsa_solution* sol, double* out) {
    if (bsa_status s = require(sol && out, "null argument")) return s;
    *out = sol->value.objective;
    return BSA_OK;
}

bsa_status bsa_solution_final_qdot(const bsa_solution* sol, double* out) {
    if (bsa_status s = require(sol && out, "null argument")) return s;
    *out = sol->value.final_qdot();
    return BSA_OK;
}

bsa_status bsa_solution_phase_count(const bsa_solution* sol, size_t* out) {
    if (bsa_status s = require(sol && out, "null argument")) return s;
    *out = sol->value.durations.size();
    return BSA_OK;
}

bsa_status bsa_solution_duration(const bsa_solution* sol, size_t phase, double* out) {
    if (bsa_status s = require(sol && out, "null argument")) return s;
    if (phase >= sol->value.durations.size()) {
        set_error("phase index out of range");
        return BSA_ERR_INVALID_ARGUMENT;
    }
    *out = sol->value.durations[phase];
    return BSA_OK;
}

bsa_status bsa_solution_converged(const bsa_solution* sol, int* out) {
    if (bsa_status s = require(sol && out, "null argument")) return s;
    *out = sol->value.status == bsa::NlpStatus::Converged ? 1 : 0;
    return BSA_OK;
}

bsa_status bsa_solution_replay(const bsa_solution* sol, const bsa_params* params, double dt,
                               bsa_trajectory** out) {
    if (bsa_status s = require(sol && params && out, "null argument")) return s;
    return guarded([&] {
        if (!(dt > 0.0)) throw bsa::ConfigError("dt must be positive");
        const bsa::ReplayResult replay = bsa::reconstruct(sol->value, params->value, dt);
        auto traj = std::make_unique<bsa_trajectory>();
        traj->value = replay.trajectory;
        traj->params = params->value;
        traj->law = bsa::SpringLaw::Linear;
        *out = traj.release();
        return BSA_OK;
    });
}

void bsa_solution_free(bsa_solution* sol) { delete sol; }

bsa_status bsa_cmd_simulate(const bsa_params* params, const char* config_json,
                            const char* out_dir) {
    if (bsa_status s = require(params && config_json && out_dir, "null argument")) return s;
    return guarded([&] {
        bsa::cmd_simulate(params->value, config_json, out_dir);
        return BSA_OK;
    });
}

bsa_status bsa_cmd_optimize(const bsa_params* params, const char* config_json,
                            const char* out_dir) {
    if (bsa_status s = require(params && config_json && out_dir, "null argument")) return s;
    return guarded([&] {
        bsa::cmd_optimize(params->value, config_json, out_dir);
        return BSA_OK;
    });
}

bsa_status bsa_cmd_sweep_final_time(const bsa_params* params, const char* config_json,
                                    const char* out_dir) {
    if (bsa_status s = require(params && config_json && out_dir, "null argument")) return s;
    return guarded([&] {
        bsa::cmd_sweep_final_time(params->value, config_json, out_dir);
        return BSA_OK;
    });
}

bsa_status bsa_cmd_sweep_initial_angle(const bsa_params* params, const char* config_json,
                                       const char* out_dir) {
    if (bsa_status s = require(params && config_json && out_dir, "null argument")) return s;
    return guarded([&] {
        bsa::cmd_sweep_initial_angle(params->value, config_json, out_dir);
        return BSA_OK;
    });
}

bsa_status bsa_cmd_identify(const bsa_params* params, const char* config_json,
                            const char* out_dir) {
    if (bsa_status s = require(params && config_json && out_dir, "null argument")) return s;
    return guarded([&] {
        bsa::cmd_identify(params->value, config_json, out_dir);
        return BSA_OK;
    });
}

bsa_status bsa_cmd_energy(const bsa_params* params, const char* config_json,
                          const char* out_dir) {
    if (bsa_status s = require(params && config_json && out_dir, "null argument")) return s;
    return guarded([&] {
        bsa::cmd_energy(params->value, config_json, out_dir);
        return BSA_OK;
    });
}

} // extern "C"
