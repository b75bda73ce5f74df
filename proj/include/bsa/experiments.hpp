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

#ifndef BSA_EXPERIMENTS_HPP
#define BSA_EXPERIMENTS_HPP

#include <map>
#include <string>
#include <vector>

#include "bsa/trajopt.hpp"

namespace bsa {

enum class SweepKind { FinalTime, InitialAngle };

/**
 * @brief Velocity-maximization sweep configuration.
 *
 * FinalTime: fixed-t_f solves over the grid (seconds) from rest at xi = 0,
 * plans BSA = [BRK, SEA] and SEA = [SEA].
 * InitialAngle: free t_f in [0, free_tf_max] from an inclined link angle
 * (grid in radians), plans BSA = [STG, SEA] and SEA = [SEA].
 *
 * Repetitions beyond the first perturb {K, friction, inertias} by i.i.d.
 * relative noise to emulate run-to-run spread; everything is seeded.
 */
struct SweepSpec {
    SweepKind kind = SweepKind::FinalTime;
    std::vector<double> grid;
    std::vector<Mode> bsa_plan{Mode::Brk, Mode::Sea};
    std::vector<Mode> sea_plan{Mode::Sea};
    int repetitions = 1;
    double perturbation = 0.0;  // relative sigma (e.g. 0.02)
    unsigned seed = 0;
    double free_tf_max = 0.5;   // InitialAngle horizon bound [s]
    CollocationConfig colloc;
    double dt_replay = 1e-4;
    int fit_degree = 3;
    int threads = 0;            // 0 = hardware concurrency

    void validate() const;
};

/// One optimize+replay outcome inside a sweep.
struct RunRecord {
    int grid_index = 0;
    double grid_value = 0.0;
    std::string plan;           // "bsa" | "sea"
    int repetition = 0;
    bool solved = false;
    double objective_qdot = 0.0;       // OCP prediction
    double replay_qdot = 0.0;          // linear-spring exact-friction replay
    double replay_qdot_full = 0.0;     // Bouc-Wen + engagement-delay replay
    std::vector<double> durations;
    double peak_abs_phi = 0.0;         // over the replayed trajectory
};

struct PointStats {
    double mean = 0.0;
    double stdev = 0.0;
    int successes = 0;
};

struct SweepResult {
    SweepKind kind = SweepKind::FinalTime;
    std::vector<double> grid;
    std::map<std::string, std::vector<PointStats>> stats;      // per plan
    std::map<std::string, std::vector<double>> fit_coeffs;     // ascending powers
    std::map<std::string, std::vector<double>> fit_residuals;  // per grid point
    std::vector<RunRecord> runs;
    int failures = 0;
};

SweepResult run_final_time_sweep(const SweepSpec& spec, const ActuatorParams& params);
SweepResult run_initial_angle_sweep(const SweepSpec& spec, const ActuatorParams& params);

/// Means/stds/polynomial fit recomputed from raw run records.
SweepResult summarize(const std::vector<RunRecord>& runs, const std::vector<double>& grid,
                      int fit_degree);

/// Least-squares polynomial fit, coefficients in ascending powers.
/// Throws ConfigError when degree >= number of points.
std::vector<double> polynomial_fit(const std::vector<double>& xs,
                                   const std::vector<double>& ys, int degree);

double polynomial_eval(const std::vector<double>& coeffs, double x);

/// Per-sample energies of a trajectory.
std::vector<Energy> energy_trace(const HybridTrajectory& traj, const ActuatorParams& params,
                                 SpringLaw law);

/// Local maxima of a series with at least the given prominence (rise above
/// the surrounding minima on both sides).
int count_prominent_maxima(const std::vector<double>& series, double prominence);

/// Largest rise of the series after its global peak (0 for monotone decay).
double max_rise_after_peak(const std::vector<double>& series);

/// Sign reversals of a control sequence, ignoring entries inside the deadband.
int count_sign_reversals(const std::vector<double>& u, double deadband);

/// Deterministic parameter perturbation used for sweep repetitions.
ActuatorParams perturb_params(const ActuatorParams& params, double sigma, unsigned seed);

} // namespace bsa

#endif // BSA_EXPERIMENTS_HPP
