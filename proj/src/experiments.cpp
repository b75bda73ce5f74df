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

#include "bsa/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "bsa/errors.hpp"

namespace bsa {

void SweepSpec::validate() const {
    if (grid.empty()) throw ConfigError("sweep grid must not be empty");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (perturbation < 0.0) throw ConfigError("perturbation must be non-negative");
    if (bsa_plan.empty() || sea_plan.empty()) throw ConfigError("sweep plans must not be empty");
    if (!(dt_replay > 0.0)) throw ConfigError("dt_replay must be positive");
    for (double g : grid) {
        if (kind == SweepKind::FinalTime && !(g > 0.0)) {
            throw ConfigError("final-time grid values must be positive");
        }
    }
}

namespace {

// Deterministic standard normal (Box-Muller over the raw generator), so
// results do not depend on library-specific distribution implementations.
double gaussian(std::mt19937_64& rng) {
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

RunRecord run_point(const SweepSpec& spec, const ActuatorParams& nominal, int grid_index,
                    const std::string& plan_name, const std::vector<Mode>& modes, int rep) {
    RunRecord rec;
    rec.grid_index = grid_index;
    rec.grid_value = spec.grid[static_cast<size_t>(grid_index)];
    rec.plan = plan_name;
    rec.repetition = rep;

    // Repetition 0 runs the nominal parameters; later repetitions perturb.
    ActuatorParams params = nominal;
    if (rep > 0 && spec.perturbation > 0.0) {
        const unsigned mix = spec.seed ^ (0x9e37u * static_cast<unsigned>(grid_index + 1)) ^
                             (plan_name == "bsa" ? 0x51u : 0xA3u) ^
                             (static_cast<unsigned>(rep) << 16);
        params = perturb_params(nominal, spec.perturbation, mix);
    }

    PhasePlan plan;
    plan.modes = modes;
    OcpBoundary boundary;
    if (spec.kind == SweepKind::FinalTime) {
        plan.t_f_fixed = true;
        plan.t_f = rec.grid_value;
    } else {
        plan.t_f_fixed = false;
        plan.t_f_range = {0.0, spec.free_tf_max};
        boundary.initial.q = rec.grid_value;
    }

    CollocationConfig colloc = spec.colloc;
    colloc.seed = spec.seed;
    colloc.parallel_starts = false;  // grid points parallelize above this

    try {
        const OcpProblem ocp = build_ocp(plan, params, colloc, boundary);
        const Solution sol = solve(ocp);
        if (sol.status != NlpStatus::Converged) {
            rec.solved = false;
            return rec;
        }
        rec.solved = true;
        rec.objective_qdot = sol.final_qdot();
        rec.durations = sol.durations;

        const ReplayResult replay = reconstruct(sol, params, spec.dt_replay);
        rec.replay_qdot = replay.final_qdot;
        for (const auto& s : replay.trajectory.samples) {
            rec.peak_abs_phi = std::max(rec.peak_abs_phi, std::abs(s.state.phi()));
        }

        SimOptions full;
        full.law = SpringLaw::BoucWen;
        full.apply_delays = true;
        const ReplayResult replay_full = reconstruct(sol, params, spec.dt_replay, full);
        rec.replay_qdot_full = replay_full.final_qdot;
    } catch (const std::exception&) {
        rec.solved = false;
    }
    return rec;
}

SweepResult run_sweep(const SweepSpec& spec, const ActuatorParams& params) {
    spec.validate();
    params.validate();

    struct Task {
        int grid_index;
        std::string plan;
        const std::vector<Mode>* modes;
        int rep;
    };
    std::vector<Task> tasks;
    for (int g = 0; g < static_cast<int>(spec.grid.size()); ++g) {
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            tasks.push_back({g, "bsa", &spec.bsa_plan, rep});
            tasks.push_back({g, "sea", &spec.sea_plan, rep});
        }
    }

    std::vector<RunRecord> runs(tasks.size());
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int workers =
        std::max(1, std::min<int>(spec.threads > 0 ? spec.threads : hw,
                                  static_cast<int>(tasks.size())));

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            runs[i] = run_point(spec, params, task.grid_index, task.plan, *task.modes, task.rep);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result = summarize(runs, spec.grid, spec.fit_degree);
    result.kind = spec.kind;
    return result;
}

} // namespace

SweepResult run_final_time_sweep(const SweepSpec& spec, const ActuatorParams& params) {
    if (spec.kind != SweepKind::FinalTime) {
        throw ConfigError("run_final_time_sweep requires kind = final_time");
    }
    return run_sweep(spec, params);
}

SweepResult run_initial_angle_sweep(const SweepSpec& spec, const ActuatorParams& params) {
    if (spec.kind != SweepKind::InitialAngle) {
        throw ConfigError("run_initial_angle_sweep requires kind = initial_angle");
    }
    return run_sweep(spec, params);
}

SweepResult summarize(const std::vector<RunRecord>& runs, const std::vector<double>& grid,
                      int fit_degree) {
    SweepResult result;
    result.grid = grid;

    std::vector<std::string> plans;
    for (const auto& run : runs) {
        if (std::find(plans.begin(), plans.end(), run.plan) == plans.end()) {
            plans.push_back(run.plan);
        }
    }
    std::sort(plans.begin(), plans.end());

    for (const auto& plan : plans) {
        std::vector<PointStats> stats(grid.size());
        for (size_t g = 0; g < grid.size(); ++g) {
            double sum = 0.0, sum_sq = 0.0;
            int n = 0;
            for (const auto& run : runs) {
                if (run.plan != plan || run.grid_index != static_cast<int>(g)) continue;
                if (!run.solved) {
                    ++result.failures;
                    continue;
                }
                sum += run.replay_qdot;
                sum_sq += run.replay_qdot * run.replay_qdot;
                ++n;
            }
            PointStats ps;
            ps.successes = n;
            if (n > 0) {
                ps.mean = sum / n;
                const double var = std::max(0.0, sum_sq / n - ps.mean * ps.mean);
                ps.stdev = n > 1 ? std::sqrt(var * n / (n - 1)) : 0.0;
            }
            stats[g] = ps;
        }

        std::vector<double> xs, ys;
        for (size_t g = 0; g < grid.size(); ++g) {
            if (stats[g].successes > 0) {
                xs.push_back(grid[g]);
                ys.push_back(stats[g].mean);
            }
        }
        std::vector<double> coeffs;
        std::vector<double> residuals(grid.size(), 0.0);
        if (!xs.empty()) {
            const int degree = std::min<int>(fit_degree, static_cast<int>(xs.size()) - 1);
            coeffs = polynomial_fit(xs, ys, std::max(0, degree));
            for (size_t g = 0; g < grid.size(); ++g) {
                if (stats[g].successes > 0) {
                    residuals[g] = stats[g].mean - polynomial_eval(coeffs, grid[g]);
                }
            }
        }
        result.stats[plan] = std::move(stats);
        result.fit_coeffs[plan] = std::move(coeffs);
        result.fit_residuals[plan] = std::move(residuals);
    }
    result.runs = runs;
    return result;
}

std::vector<double> polynomial_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                                   int degree) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw ConfigError("polynomial_fit needs matching non-empty samples");
    }
    if (degree < 0 || degree >= static_cast<int>(xs.size())) {
        throw ConfigError("polynomial_fit degree must be < number of points");
    }
    Eigen::MatrixXd vander(xs.size(), degree + 1);
    for (size_t i = 0; i < xs.size(); ++i) {
        double pow_x = 1.0;
        for (int j = 0; j <= degree; ++j) {
            vander(static_cast<long>(i), j) = pow_x;
            pow_x *= xs[i];
        }
    }
    Eigen::VectorXd rhs(xs.size());
    for (size_t i = 0; i < ys.size(); ++i) rhs[static_cast<long>(i)] = ys[i];
    const Eigen::VectorXd sol = vander.colPivHouseholderQr().solve(rhs);
    return std::vector<double>(sol.data(), sol.data() + sol.size());
}

double polynomial_eval(const std::vector<double>& coeffs, double x) {
    double value = 0.0;
    for (size_t i = coeffs.size(); i-- > 0;) value = value * x + coeffs[i];
    return value;
}

std::vector<Energy> energy_trace(const HybridTrajectory& traj, const ActuatorParams& params,
                                 SpringLaw law) {
    std::vector<Energy> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) out.push_back(energy(s.state, params, law));
    return out;
}

int count_prominent_maxima(const std::vector<double>& series, double prominence) {
    if (series.size() < 3) return 0;
    int count = 0;
    for (size_t i = 1; i + 1 < series.size(); ++i) {
        if (!(series[i] >= series[i - 1] && series[i] > series[i + 1])) continue;
        // prominence: drop to the highest of the minima reached on each side
        // before a higher value appears.
        double left_min = series[i];
        for (size_t j = i; j-- > 0;) {
            left_min = std::min(left_min, series[j]);
            if (series[j] > series[i]) break;
        }
        double right_min = series[i];
        for (size_t j = i + 1; j < series.size(); ++j) {
            right_min = std::min(right_min, series[j]);
            if (series[j] > series[i]) break;
        }
        if (series[i] - std::max(left_min, right_min) >= prominence) ++count;
    }
    return count;
}

double max_rise_after_peak(const std::vector<double>& series) {
    if (series.empty()) return 0.0;
    const size_t peak =
        static_cast<size_t>(std::max_element(series.begin(), series.end()) - series.begin());
    double running_min = series[peak];
    double max_rise = 0.0;
    for (size_t i = peak; i < series.size(); ++i) {
        running_min = std::min(running_min, series[i]);
        max_rise = std::max(max_rise, series[i] - running_min);
    }
    return max_rise;
}

int count_sign_reversals(const std::vector<double>& u, double deadband) {
    int reversals = 0;
    int last_sign = 0;
    for (double v : u) {
        if (std::abs(v) <= deadband) continue;
        const int sign = v > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++reversals;
        last_sign = sign;
    }
    return reversals;
}

ActuatorParams perturb_params(const ActuatorParams& params, double sigma, unsigned seed) {
    std::mt19937_64 rng(0x2545F4914F6CDD1Dull ^ (static_cast<uint64_t>(seed) << 1));
    ActuatorParams p = params;
    auto jitter = [&](double v) {
        const double factor = std::clamp(1.0 + sigma * gaussian(rng), 0.5, 1.5);
        return v * factor;
    };
    p.K = jitter(p.K);
    p.J_psi = jitter(p.J_psi);
    p.J_q = jitter(p.J_q);
    p.tauC_psi = jitter(p.tauC_psi);
    p.tauC_q = jitter(p.tauC_q);
    p.d_psi = jitter(p.d_psi);
    p.d_q = jitter(p.d_q);
    return p;
}

} // namespace bsa
