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

#ifndef BSA_TRAJOPT_HPP
#define BSA_TRAJOPT_HPP

#include <array>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "bsa/nlp.hpp"
#include "bsa/sim.hpp"

namespace bsa {

/**
 * @brief A-priori mode sequence and final-time policy of a multi-phase OCP.
 *
 * The final time is either fixed (phase durations sum to t_f exactly) or free
 * within [t_f_range.first, t_f_range.second]. Per-phase duration bounds
 * default to [0.02 s, t_f upper limit]; the lower bound keeps the
 * transcription well-conditioned and covers the clutch engagement delay.
 */
struct PhasePlan {
    std::vector<Mode> modes;
    std::vector<std::pair<double, double>> duration_bounds;  // optional, per phase
    bool t_f_fixed = true;
    double t_f = 1.0;
    std::pair<double, double> t_f_range{0.0, 0.5};

    double t_f_upper() const { return t_f_fixed ? t_f : t_f_range.second; }
    void validate() const;  // throws ConfigError
};

enum class CollocationScheme { Trapezoidal, HermiteSimpson };

struct CollocationConfig {
    int segments_per_phase = 25;
    CollocationScheme scheme = CollocationScheme::Trapezoidal;
    double kkt_tol = 1e-6;
    int max_iter = 3000;
    int multi_start = 5;     // perturbed initial guesses, best objective wins
    unsigned seed = 0;       // perturbation seed (deterministic)
    double min_phase_duration = 0.02;  // s
    bool parallel_starts = true;
};

/// Path constraint levels; defaults come from the actuator parameters.
struct PathBounds {
    double theta_range = 1.2;
    double phi_max = 0.3;
    double u_max = 4.0;

    static PathBounds from_params(const ActuatorParams& p) {
        return {p.theta_range, p.phi_max, p.u_max};
    }
};

/// Initial state plus optional terminal pins on [theta, psi, q, psi_dot, q_dot].
struct OcpBoundary {
    HybridState initial;
    std::array<std::optional<double>, 5> terminal{};
};

/// Optimized node values and solver diagnostics for one plan.
struct Solution {
    std::vector<Mode> modes;
    std::vector<Eigen::MatrixXd> states;    // per phase: 5 x (segments+1), rows
                                            // [theta, psi, q, psi_dot, q_dot]
    std::vector<Eigen::VectorXd> controls;  // per phase: segments+1
    std::vector<double> durations;          // per phase [s]
    double objective = 0.0;                 // J = -q_dot(t_f)
    NlpStatus status = NlpStatus::Stalled;
    double kkt_error = 0.0;
    double constraint_violation = 0.0;
    int iterations = 0;
    int multi_start_winner = 0;

    double final_qdot() const { return -objective; }
    std::vector<double> node_times(int phase) const;  // global time stamps
    double total_duration() const;
};

/**
 * @brief Direct-collocation transcription of the velocity-maximization OCP.
 *
 * Decision variables per phase: states and controls at the collocation nodes
 * plus the phase duration. Dynamics use the linear spring law with smoothed
 * friction; phase interfaces are linked through the exact reset map; the
 * motor angle, spring deflection, and command magnitude are path-bounded at
 * every node. The objective is the negated link velocity at the final node.
 *
 * Copyable; the underlying transcription data is shared and immutable.
 */
class OcpProblem {
public:
    const NlpProblem& nlp() const;
    int num_phases() const;
    int segments_per_phase() const;
    int num_vars() const;
    int num_cons() const;

    int state_index(int phase, int node, int comp) const;
    int control_index(int phase, int node) const;
    int duration_index(int phase) const;

    /// Deterministic initial guess; k = 0 is the nominal interpolation,
    /// k >= 1 adds seeded low-frequency control perturbations.
    Eigen::VectorXd initial_guess(unsigned k) const;

    const PhasePlan& plan() const;
    const CollocationConfig& config() const;
    const ActuatorParams& params() const;
    const HybridState& initial_state() const;  // after reset into the first mode

    Solution package(const NlpResult& r) const;

private:
    friend OcpProblem build_ocp(const PhasePlan&, const ActuatorParams&,
                                const CollocationConfig&, const OcpBoundary&,
                                std::optional<PathBounds>);
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

OcpProblem build_ocp(const PhasePlan& plan, const ActuatorParams& params,
                     const CollocationConfig& config, const OcpBoundary& boundary,
                     std::optional<PathBounds> bounds = {});

/// Multi-start NLP solve; never throws on solver failure (see Solution::status).
Solution solve(const OcpProblem& problem);

/// Open-loop replay of a solution through the hybrid simulator.
struct ReplayResult {
    HybridTrajectory trajectory;
    double final_qdot = 0.0;
    double gap = 0.0;  // |replayed q_dot(t_f) - OCP q_dot(t_f)|
};

/**
 * @brief Replays the optimized control (piecewise linear between nodes)
 * through execute_schedule with the exact, non-smoothed dynamics.
 */
ReplayResult reconstruct(const Solution& solution, const ActuatorParams& params, double dt,
                         const SimOptions& opt = {});

/// Max relative error of the analytic Jacobian/gradient against central
/// finite differences at @p point.
double check_derivatives(const OcpProblem& problem, const Eigen::VectorXd& point,
                         double eps = 1e-6);

} // namespace bsa

#endif // BSA_TRAJOPT_HPP
