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

#ifndef BSA_SIM_HPP
#define BSA_SIM_HPP

#include <vector>

#include "bsa/model.hpp"

namespace bsa {

/**
 * @brief Motor velocity command u(t), piecewise linear between samples.
 *
 * Duplicate sample times encode a step (the later sample wins from that time
 * on). Outside the sampled range the signal clamps to the end values.
 */
class ControlSignal {
public:
    ControlSignal() : times_{0.0}, values_{0.0} {}

    static ControlSignal constant(double u) { return ControlSignal({0.0}, {u}); }
    static ControlSignal sampled(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

private:
    ControlSignal(std::vector<double> t, std::vector<double> v)
        : times_(std::move(t)), values_(std::move(v)) {}

    std::vector<double> times_;
    std::vector<double> values_;
};

/// One scheduled phase: which mode and for how long.
struct PhaseSpec {
    Mode mode = Mode::Dec;
    double duration = 0.0;
};

/// A-priori mode sequence with a global time-indexed control.
struct Schedule {
    std::vector<PhaseSpec> phases;
    ControlSignal control;

    double total_duration() const;
    void validate() const;  // throws ConfigError on non-positive durations
};

struct TrajectorySample {
    double t = 0.0;
    HybridState state;
    Mode mode = Mode::Dec;
};

/// A recorded mode switch with the impulse that enforced the new constraint.
struct SwitchEvent {
    double t = 0.0;
    Mode from = Mode::Dec;
    Mode to = Mode::Dec;
    Eigen::VectorXd impulse;  // one entry per row of C_to (empty for DEC)
    HybridState before;
    HybridState after;
};

struct HybridTrajectory {
    std::vector<TrajectorySample> samples;
    std::vector<SwitchEvent> events;
    double dt = 0.0;

    const HybridState& final_state() const;
    double final_time() const;
};

/// Fidelity switches shared by the simulation entry points.
struct SimOptions {
    SpringLaw law = SpringLaw::Linear;
    HysteresisForm hysteresis_form = HysteresisForm::RateMagnitude;
    bool smoothed_friction = false;  // exact sgn() by default in simulation
    bool apply_delays = false;       // clutch switches land delay_{brake,clutch} late
};

/**
 * @brief Constraint torque lambda enforcing C xi_ddot = 0 during continuous flow.
 *
 * lambda = (C B^-1 C^T)^-1 C B^-1 (g + tau_f - tau_s); one entry per row of C.
 * DEC returns an empty vector.
 */
Eigen::VectorXd constraint_torque(Mode mode, const HybridState& x, const ActuatorParams& p,
                                  SpringLaw law, bool smoothed_friction = false);

/**
 * @brief Mode-dependent vector field of the switched system.
 *
 * Returns the time derivative packed in HybridState slots:
 * theta_dot = u (velocity-source motor), xi_dot pass-through,
 * xi_ddot = B^-1 (C^T lambda + tau_s - g - tau_f), plus h_dot under BoucWen.
 *
 * With exact (non-smoothed) friction, a coordinate at |v| < 1e-6 rad/s whose
 * driving torque is below its Coulomb level is treated as held by stiction.
 */
HybridState continuous_dynamics(Mode mode, const HybridState& x, double u,
                                const ActuatorParams& p, const SimOptions& opt);

/**
 * @brief Contact impulse restoring C_to xi_dot = 0 at a mode switch.
 *
 * Lambda = -(C B^-1 C^T)^-1 C xi_dot_minus; the reset velocity
 * xi_dot_plus = xi_dot_minus + B^-1 C^T Lambda then satisfies the constraint.
 * DEC engagement needs no impulse (empty vector).
 */
Eigen::VectorXd impact_impulse(Mode mode_to, const Eigen::Vector2d& xi_dot_minus,
                               const ActuatorParams& p);

/// Jump map: positions and h unchanged, velocities updated per impact_impulse.
HybridState reset(Mode mode_to, const HybridState& x_minus, const ActuatorParams& p);

/**
 * @brief Fixed-step RK4 flow of one mode, appending samples to @p out.
 *
 * Samples land on t0 + k*dt with a final partial step so the last sample sits
 * exactly at t0 + duration. Throws NumericalError on a non-finite state.
 */
void integrate_phase(Mode mode, const HybridState& x0, const ControlSignal& u,
                     double t0, double duration, double dt, const ActuatorParams& p,
                     const SimOptions& opt, HybridTrajectory& out);

/**
 * @brief Runs a full schedule: continuous flow alternating with reset maps.
 *
 * With opt.apply_delays, each commanded clutch change takes physical effect
 * delay_brake / delay_clutch seconds later; transitions toggling both
 * clutches pass through the intermediate mode between the two landings.
 * All switches are recorded as events.
 */
HybridTrajectory execute_schedule(const Schedule& schedule, const HybridState& x0,
                                  double dt, const ActuatorParams& p, const SimOptions& opt);

} // namespace bsa

#endif // BSA_SIM_HPP
