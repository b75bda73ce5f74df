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

#include "bsa/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bsa/errors.hpp"

namespace bsa {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

double to_double(const std::string& s, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ConfigError(path + ": non-numeric field '" + s + "'");
    return v;
}

} // namespace

void write_trajectory_csv(const HybridTrajectory& traj, const ActuatorParams& params,
                          SpringLaw law, const std::string& samples_path,
                          const std::string& events_path) {
    {
        std::ofstream out = open_out(samples_path);
        out << "t,mode,theta,psi,q,psi_dot,q_dot,h,tau_s,E_k,E_p\n";
        for (const auto& s : traj.samples) {
            const Energy e = energy(s.state, params, law);
            const double tau_s = spring_torque(s.state.theta, s.state.psi, s.state.h, law, params);
            out << fmt(s.t) << ',' << mode_name(s.mode) << ',' << fmt(s.state.theta) << ','
                << fmt(s.state.psi) << ',' << fmt(s.state.q) << ',' << fmt(s.state.psi_dot)
                << ',' << fmt(s.state.q_dot) << ',' << fmt(s.state.h) << ',' << fmt(tau_s)
                << ',' << fmt(e.kinetic) << ',' << fmt(e.potential) << '\n';
        }
    }
    {
        std::ofstream out = open_out(events_path);
        out << "t,from,to,Lambda_1,Lambda_2\n";
        for (const auto& ev : traj.events) {
            const double l1 = ev.impulse.size() > 0 ? ev.impulse[0] : 0.0;
            const double l2 = ev.impulse.size() > 1 ? ev.impulse[1] : 0.0;
            out << fmt(ev.t) << ',' << mode_name(ev.from) << ',' << mode_name(ev.to) << ','
                << fmt(l1) << ',' << fmt(l2) << '\n';
        }
    }
}

HybridTrajectory read_trajectory_csv(const std::string& samples_path) {
    std::ifstream in(samples_path);
    if (!in) throw ConfigError("cannot open trajectory CSV '" + samples_path + "'");
    HybridTrajectory traj;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(samples_path + ": empty file");
    if (line.rfind("t,mode,theta", 0) != 0) {
        throw ConfigError(samples_path + ": unexpected header '" + line + "'");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < 8) throw ConfigError(samples_path + ": short row '" + line + "'");
        TrajectorySample s;
        s.t = to_double(f[0], samples_path);
        s.mode = mode_from_name(f[1]);
        s.state.theta = to_double(f[2], samples_path);
        s.state.psi = to_double(f[3], samples_path);
        s.state.q = to_double(f[4], samples_path);
        s.state.psi_dot = to_double(f[5], samples_path);
        s.state.q_dot = to_double(f[6], samples_path);
        s.state.h = to_double(f[7], samples_path);
        traj.samples.push_back(s);
    }
    if (traj.samples.size() >= 2) traj.dt = traj.samples[1].t - traj.samples[0].t;
    return traj;
}

void write_energy_csv(const HybridTrajectory& traj, const ActuatorParams& params, SpringLaw law,
                      const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,mode,E_k,E_p,E_total\n";
    for (const auto& s : traj.samples) {
        const Energy e = energy(s.state, params, law);
        out << fmt(s.t) << ',' << mode_name(s.mode) << ',' << fmt(e.kinetic) << ','
            << fmt(e.potential) << ',' << fmt(e.total()) << '\n';
    }
}

void write_solution_nodes_csv(const Solution& sol, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "phase,node,t,u,theta,psi,q,psi_dot,q_dot\n";
    for (size_t p = 0; p < sol.modes.size(); ++p) {
        const auto times = sol.node_times(static_cast<int>(p));
        for (long k = 0; k < sol.controls[p].size(); ++k) {
            const auto x = sol.states[p].col(k);
            out << mode_name(sol.modes[p]) << ',' << k << ',' << fmt(times[static_cast<size_t>(k)])
                << ',' << fmt(sol.controls[p][k]) << ',' << fmt(x[0]) << ',' << fmt(x[1]) << ','
                << fmt(x[2]) << ',' << fmt(x[3]) << ',' << fmt(x[4]) << '\n';
        }
    }
}

void write_sweep_summary_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "grid_value,plan,mean,std,fit_residual,successes\n";
    for (const auto& [plan, stats] : result.stats) {
        for (size_t g = 0; g < result.grid.size(); ++g) {
            const auto res_it = result.fit_residuals.find(plan);
            const double resid =
                res_it != result.fit_residuals.end() && g < res_it->second.size()
                    ? res_it->second[g]
                    : 0.0;
            out << fmt(result.grid[g]) << ',' << plan << ',' << fmt(stats[g].mean) << ','
                << fmt(stats[g].stdev) << ',' << fmt(resid) << ',' << stats[g].successes << '\n';
        }
    }
}

void write_sweep_runs_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "grid_value,plan,repetition,solved,objective_qdot,replay_qdot,replay_qdot_full,"
           "peak_abs_phi,durations\n";
    for (const auto& run : result.runs) {
        out << fmt(run.grid_value) << ',' << run.plan << ',' << run.repetition << ','
            << (run.solved ? 1 : 0) << ',' << fmt(run.objective_qdot) << ','
            << fmt(run.replay_qdot) << ',' << fmt(run.replay_qdot_full) << ','
            << fmt(run.peak_abs_phi) << ',';
        for (size_t i = 0; i < run.durations.size(); ++i) {
            out << (i ? ";" : "") << fmt(run.durations[i]);
        }
        out << '\n';
    }
}

void write_cycles_csv(const LoadingCycleData& data, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,phi,tau\n";
    for (size_t i = 0; i < data.t.size(); ++i) {
        out << fmt(data.t[i]) << ',' << fmt(data.phi[i]) << ',' << fmt(data.tau[i]) << '\n';
    }
}

LoadingCycleData read_cycles_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open cycle CSV '" + path + "'");
    LoadingCycleData data;
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,phi,tau", 0) != 0) {
        throw ConfigError(path + ": expected header 't,phi,tau'");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < 3) throw ConfigError(path + ": short row '" + line + "'");
        data.t.push_back(to_double(f[0], path));
        data.phi.push_back(to_double(f[1], path));
        data.tau.push_back(to_double(f[2], path));
    }
    return data;
}

void write_delay_log_csv(const DelayLog& log, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "channel,t,value\n";
    for (size_t i = 0; i < log.t_cmd.size(); ++i) {
        out << "cmd," << fmt(log.t_cmd[i]) << ',' << fmt(log.cmd[i]) << '\n';
    }
    for (size_t i = 0; i < log.t_resp.size(); ++i) {
        out << "resp," << fmt(log.t_resp[i]) << ',' << fmt(log.resp[i]) << '\n';
    }
}

DelayLog read_delay_log_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open delay log '" + path + "'");
    DelayLog log;
    std::string line;
    if (!std::getline(in, line) || line.rfind("channel,t,value", 0) != 0) {
        throw ConfigError(path + ": expected header 'channel,t,value'");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < 3) throw ConfigError(path + ": short row '" + line + "'");
        if (f[0] == "cmd") {
            log.t_cmd.push_back(to_double(f[1], path));
            log.cmd.push_back(to_double(f[2], path));
        } else if (f[0] == "resp") {
            log.t_resp.push_back(to_double(f[1], path));
            log.resp.push_back(to_double(f[2], path));
        } else {
            throw ConfigError(path + ": unknown channel '" + f[0] + "'");
        }
    }
    return log;
}

std::string config_hash(const std::string& canonical) {
    uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace bsa
