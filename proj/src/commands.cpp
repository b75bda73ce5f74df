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

#include "bsa/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "bsa/config.hpp"
#include "bsa/errors.hpp"
#include "bsa/identify.hpp"
#include "bsa/io.hpp"

namespace bsa {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string path_in(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "'");
}

void write_manifest(const std::string& dir, const char* command, const std::string& config_json,
                    const json& results, const ActuatorParams& params) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = json::parse(config_json);
    manifest["config_hash"] = config_hash(canonical_json(config_json));
    json pj;
    for (const auto& [key, value] : params_to_key_values(params)) pj[key] = value;
    manifest["params"] = pj;
    manifest["results"] = results;

    std::ofstream out(path_in(dir, "manifest.json"));
    if (!out) throw ConfigError("cannot write manifest in '" + dir + "'");
    out << manifest.dump(2) << "\n";
}

json sweep_results_json(const SweepResult& result) {
    json res;
    res["failures"] = result.failures;
    for (const auto& [plan, stats] : result.stats) {
        json rows = json::array();
        for (size_t g = 0; g < result.grid.size(); ++g) {
            rows.push_back({{"grid", result.grid[g]},
                            {"mean", stats[g].mean},
                            {"std", stats[g].stdev},
                            {"successes", stats[g].successes}});
        }
        res[plan] = rows;
    }
    return res;
}

void run_sweep_command(const ActuatorParams& params, const std::string& config_json,
                       const std::string& out_dir, SweepKind kind, const char* name) {
    ensure_out_dir(out_dir);
    const SweepSpec spec = parse_sweep_config(config_json, kind);
    const SweepResult result = kind == SweepKind::FinalTime
                                   ? run_final_time_sweep(spec, params)
                                   : run_initial_angle_sweep(spec, params);

    write_sweep_summary_csv(result, path_in(out_dir, "summary.csv"));
    write_sweep_runs_csv(result, path_in(out_dir, "runs.csv"));
    write_manifest(out_dir, name, config_json, sweep_results_json(result), params);
    if (result.failures > 0) {
        throw PartialFailure(std::to_string(result.failures) + " sweep point(s) failed");
    }
}

} // namespace

void cmd_simulate(const ActuatorParams& params, const std::string& config_json,
                  const std::string& out_dir) {
    ensure_out_dir(out_dir);
    const SimulateConfig cfg = parse_simulate_config(config_json);
    const HybridTrajectory traj =
        execute_schedule(cfg.schedule, cfg.initial_state, cfg.dt, params, cfg.options);

    write_trajectory_csv(traj, params, cfg.options.law, path_in(out_dir, "trajectory.csv"),
                         path_in(out_dir, "events.csv"));

    json results;
    results["samples"] = traj.samples.size();
    results["events"] = traj.events.size();
    results["final_time"] = traj.final_time();
    results["final_q_dot"] = traj.final_state().q_dot;
    write_manifest(out_dir, "simulate", config_json, results, params);
}

void cmd_optimize(const ActuatorParams& params, const std::string& config_json,
                  const std::string& out_dir) {
    ensure_out_dir(out_dir);
    const OptimizeConfig cfg = parse_optimize_config(config_json);
    std::optional<PathBounds> bounds = cfg.path_bounds;

    const OcpProblem ocp = build_ocp(cfg.plan, params, cfg.colloc, cfg.boundary, bounds);
    const Solution sol = solve(ocp);
    if (sol.status != NlpStatus::Converged) {
        throw SolverError(std::string("optimization failed: ") + nlp_status_name(sol.status));
    }
    const ReplayResult replay = reconstruct(sol, params, cfg.dt_replay);

    write_solution_nodes_csv(sol, path_in(out_dir, "solution_nodes.csv"));
    write_trajectory_csv(replay.trajectory, params, SpringLaw::Linear,
                         path_in(out_dir, "trajectory.csv"), path_in(out_dir, "events.csv"));

    json results;
    results["status"] = nlp_status_name(sol.status);
    results["objective"] = sol.objective;
    results["final_q_dot"] = sol.final_qdot();
    results["replay_q_dot"] = replay.final_qdot;
    results["replay_gap"] = replay.gap;
    results["durations"] = sol.durations;
    results["iterations"] = sol.iterations;
    results["kkt_error"] = sol.kkt_error;
    results["multi_start_winner"] = sol.multi_start_winner;
    write_manifest(out_dir, "optimize", config_json, results, params);
}

void cmd_sweep_final_time(const ActuatorParams& params, const std::string& config_json,
                          const std::string& out_dir) {
    run_sweep_command(params, config_json, out_dir, SweepKind::FinalTime, "sweep-tf");
}

void cmd_sweep_initial_angle(const ActuatorParams& params, const std::string& config_json,
                             const std::string& out_dir) {
    run_sweep_command(params, config_json, out_dir, SweepKind::InitialAngle, "sweep-q0");
}

void cmd_identify(const ActuatorParams& params, const std::string& config_json,
                  const std::string& out_dir) {
    ensure_out_dir(out_dir);
    const IdentifyConfig cfg = parse_identify_config(config_json);

    LoadingCycleData data;
    if (!cfg.input_csv.empty()) {
        data = read_cycles_csv(cfg.input_csv);
        data.cycles = std::max(data.cycles, 2);
    } else {
        data = generate_cycles(params, cfg.theta_dot_set, cfg.theta_lim, cfg.cycles, cfg.dt,
                               cfg.form);
        if (cfg.noise > 0.0) {
            std::mt19937_64 rng(cfg.seed + 1);
            const double scale = cfg.noise * params.tau_s_max;
            for (double& tau : data.tau) {
                const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
                const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
                tau += scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            }
        }
        write_cycles_csv(data, path_in(out_dir, "cycles.csv"));
    }

    const double k_hat = fit_stiffness(data);
    const BoucWenFit bw =
        fit_bouc_wen(data, cfg.fit_K ? std::nullopt : std::optional<double>(k_hat), cfg.form);

    const DelayLog log = generate_delay_log(params, cfg.delay_inject, M_PI / 2, cfg.delay_dt);
    write_delay_log_csv(log, path_in(out_dir, "delay_log.csv"));
    const double delay_hat = estimate_delay(log, cfg.delay_threshold);

    {
        std::ofstream report(path_in(out_dir, "report.txt"));
        if (!report) throw ConfigError("cannot write identification report");
        char buf[64];
        auto line = [&](const char* key, double value) {
            std::snprintf(buf, sizeof(buf), "%.12g", value);
            report << key << " = " << buf << "\n";
        };
        line("K_linear", k_hat);
        line("K_bouc_wen", bw.K);
        line("alpha", bw.alpha);
        line("beta", bw.beta);
        line("gamma", bw.gamma);
        line("rms_residual", bw.rms_residual);
        line("loop_area_per_cycle", loop_area_per_cycle(data));
        line("delay_injected", cfg.delay_inject);
        line("delay_estimated", delay_hat);
    }

    json results;
    results["K_linear"] = k_hat;
    results["alpha"] = bw.alpha;
    results["beta"] = bw.beta;
    results["gamma"] = bw.gamma;
    results["K_bouc_wen"] = bw.K;
    results["rms_residual"] = bw.rms_residual;
    results["delay_estimated"] = delay_hat;
    write_manifest(out_dir, "identify", config_json, results, params);
}

void cmd_energy(const ActuatorParams& params, const std::string& config_json,
                const std::string& out_dir) {
    ensure_out_dir(out_dir);
    const EnergyConfig cfg = parse_energy_config(config_json);
    const HybridTrajectory traj = read_trajectory_csv(cfg.input_csv);
    write_energy_csv(traj, params, cfg.law, path_in(out_dir, "energy.csv"));

    json results;
    results["samples"] = traj.samples.size();
    if (!traj.samples.empty()) {
        const Energy ef = energy(traj.final_state(), params, cfg.law);
        results["final_E_k"] = ef.kinetic;
        results["final_E_p"] = ef.potential;
    }
    write_manifest(out_dir, "energy", config_json, results, params);
}

} // namespace bsa
