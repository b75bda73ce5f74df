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

#include "bsa/sim.hpp"

#include <algorithm>
#include <cmath>

#include "bsa/errors.hpp"

namespace bsa {

namespace {

constexpr double kStictionVelTol = 1e-6;  // rad/s
constexpr double kTimeEps = 1e-12;        // s, boundary bookkeeping only

Eigen::Vector2d inertia_diag(const ActuatorParams& p) { return {p.J_psi, p.J_q}; }

// C B^-1 C^T for the mode (square, rows(C) x rows(C)).
Eigen::MatrixXd constraint_mass(const Eigen::MatrixXd& c, const ActuatorParams& p) {
    const Eigen::Vector2d b_inv = inertia_diag(p).cwiseInverse();
    return c * b_inv.asDiagonal() * c.transpose();
}

// Projected inverse inertia: xi_ddot = P * (tau_s - g - tau_f).
Eigen::Matrix2d projected_inertia_inverse(Mode mode, const ActuatorParams& p) {
    const Eigen::Vector2d b_inv = inertia_diag(p).cwiseInverse();
    if (mode == Mode::Dec) return b_inv.asDiagonal();
    if (mode == Mode::Brk) return Eigen::Matrix2d::Zero();
    const Eigen::MatrixXd c = constraint_matrix(mode);
    const Eigen::MatrixXd m = constraint_mass(c, p);
    Eigen::Matrix2d proj = Eigen::Matrix2d::Identity() -
                           c.transpose() * m.inverse() * c * b_inv.asDiagonal();
    return b_inv.asDiagonal() * proj;
}

// Non-friction generalized force tau_s_vec - g on [psi, q].
Eigen::Vector2d applied_force(const HybridState& x, const ActuatorParams& p, SpringLaw law) {
    Eigen::Vector2d f;
    f << spring_torque(x.theta, x.psi, x.h, law, p), 0.0;
    return f - gravity_vector(x.q, p);
}

// Accelerations of [psi, q] with exact-friction stiction handling per mode.
Eigen::Vector2d accelerations(Mode mode, const HybridState& x, const ActuatorParams& p,
                              SpringLaw law, bool smoothed) {
    if (mode == Mode::Brk) return Eigen::Vector2d::Zero();

    const Eigen::Vector2d f_applied = applied_force(x, p, law);
    const Eigen::Matrix2d proj = projected_inertia_inverse(mode, p);

    if (smoothed) {
        return proj * (f_applied - friction_torque(x.psi_dot, x.q_dot, p, true));
    }

    const Eigen::Vector2d viscous(p.d_psi * x.psi_dot, p.d_q * x.q_dot);
    const bool psi_rest = std::abs(x.psi_dot) < kStictionVelTol;
    const bool q_rest = std::abs(x.q_dot) < kStictionVelTol;
    auto coulomb = [](double v, double mag) { return v > 0.0 ? mag : (v < 0.0 ? -mag : 0.0); };

    switch (mode) {
        case Mode::Dec: {
            // Independent coordinates: Coulomb cancels the driving torque while
            // it stays below the breakaway level.
            Eigen::Vector2d a;
            const Eigen::Vector2d drive = f_applied - viscous;
            const double tau_c[2] = {p.tauC_psi, p.tauC_q};
            const bool rest[2] = {psi_rest, q_rest};
            const double inertia[2] = {p.J_psi, p.J_q};
            const double vel[2] = {x.psi_dot, x.q_dot};
            for (int i = 0; i < 2; ++i) {
                double fric = rest[i] ? std::clamp(drive[i], -tau_c[i], tau_c[i])
                                      : coulomb(vel[i], tau_c[i]);
                a[i] = (drive[i] - fric) / inertia[i];
            }
            return a;
        }
        case Mode::Sea: {
            if (psi_rest && q_rest) {
                // Both bodies move together: combined Coulomb capacity on the
                // single free direction.
                const double drive = f_applied.sum() - viscous.sum();
                const double capacity = p.tauC_psi + p.tauC_q;
                if (std::abs(drive) <= capacity) return Eigen::Vector2d::Zero();
                const double a = (drive - coulomb(drive, capacity)) / (p.J_psi + p.J_q);
                return {a, a};
            }
            break;
        }
        case Mode::Stg: {
            if (q_rest) {
                const double drive = f_applied[1] - viscous[1];
                if (std::abs(drive) <= p.tauC_q) return Eigen::Vector2d::Zero();
                return {0.0, (drive - coulomb(drive, p.tauC_q)) / p.J_q};
            }
            break;
        }
        default:
            break;
    }
    return proj * (f_applied - friction_torque(x.psi_dot, x.q_dot, p, false));
}

} // namespace

ControlSignal ControlSignal::sampled(std::vector<double> times, std::vector<double> values) {
    if (times.empty() || times.size() != values.size()) {
        throw ConfigError("control signal needs matching, non-empty time/value samples");
    }
    for (size_t i = 1; i < times.size(); ++i) {
        if (times[i] < times[i - 1]) throw ConfigError("control sample times must be non-decreasing");
    }
    return ControlSignal(std::move(times), std::move(values));
}

double ControlSignal::operator()(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    // First sample with time > t; the interval [it-1, it) covers t. Duplicate
    // times collapse to a step because upper_bound skips past them.
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const size_t hi = static_cast<size_t>(it - times_.begin());
    const size_t lo = hi - 1;
    const double span = times_[hi] - times_[lo];
    if (span <= 0.0) return values_[lo];
    const double w = (t - times_[lo]) / span;
    return values_[lo] + w * (values_[hi] - values_[lo]);
}

double Schedule::total_duration() const {
    double total = 0.0;
    for (const auto& ph : phases) total += ph.duration;
    return total;
}

void Schedule::validate() const {
    for (const auto& ph : phases) {
        if (!(ph.duration > 0.0) || !std::isfinite(ph.duration)) {
            throw ConfigError("schedule phase durations must be strictly positive");
        }
    }
}

const HybridState& HybridTrajectory::final_state() const {
    if (samples.empty()) throw std::logic_error("empty trajectory");
    return samples.back().state;
}

double HybridTrajectory::final_time() const {
    if (samples.empty()) throw std::logic_error("empty trajectory");
    return samples.back().t;
}

Eigen::VectorXd constraint_torque(Mode mode, const HybridState& x, const ActuatorParams& p,
                                  SpringLaw law, bool smoothed_friction) {
    const Eigen::MatrixXd c = constraint_matrix(mode);
    if (c.rows() == 0) return Eigen::VectorXd(0);
    Eigen::Vector2d tau_s_vec;
    tau_s_vec << spring_torque(x.theta, x.psi, x.h, law, p), 0.0;
    const Eigen::Vector2d force = gravity_vector(x.q, p) +
                                  friction_torque(x.psi_dot, x.q_dot, p, smoothed_friction) -
                                  tau_s_vec;
    const Eigen::Vector2d b_inv = inertia_diag(p).cwiseInverse();
    const Eigen::MatrixXd m = constraint_mass(c, p);
    return m.ldlt().solve(c * b_inv.asDiagonal() * force);
}

HybridState continuous_dynamics(Mode mode, const HybridState& x, double u,
                                const ActuatorParams& p, const SimOptions& opt) {
    const Eigen::Vector2d a = accelerations(mode, x, p, opt.law, opt.smoothed_friction);
    HybridState dx;
    dx.theta = u;
    dx.psi = x.psi_dot;
    dx.q = x.q_dot;
    dx.psi_dot = a[0];
    dx.q_dot = a[1];
    dx.h = opt.law == SpringLaw::BoucWen
               ? hysteresis_rate(x.phi(), u - x.psi_dot, x.h, p, opt.hysteresis_form)
               : 0.0;
    return dx;
}

Eigen::VectorXd impact_impulse(Mode mode_to, const Eigen::Vector2d& xi_dot_minus,
                               const ActuatorParams& p) {
    const Eigen::MatrixXd c = constraint_matrix(mode_to);
    if (c.rows() == 0) return Eigen::VectorXd(0);
    const Eigen::MatrixXd m = constraint_mass(c, p);
    return m.ldlt().solve(-c * xi_dot_minus);
}

HybridState reset(Mode mode_to, const HybridState& x_minus, const ActuatorParams& p) {
    // Closed per-mode forms of xi_dot_plus = xi_dot_minus + B^-1 C^T Lambda,
    // so the new constraint holds exactly and reset is exactly idempotent.
    HybridState x_plus = x_minus;
    switch (mode_to) {
        case Mode::Dec:
            break;
        case Mode::Sea: {
            if (x_minus.psi_dot != x_minus.q_dot) {
                const double v = (p.J_psi * x_minus.psi_dot + p.J_q * x_minus.q_dot) /
                                 (p.J_psi + p.J_q);
                x_plus.psi_dot = v;
                x_plus.q_dot = v;
            }
            break;
        }
        case Mode::Stg:
            x_plus.psi_dot = 0.0;
            break;
        case Mode::Brk:
            x_plus.psi_dot = 0.0;
            x_plus.q_dot = 0.0;
            break;
    }
    return x_plus;
}

void integrate_phase(Mode mode, const HybridState& x0, const ControlSignal& u,
                     double t0, double duration, double dt, const ActuatorParams& p,
                     const SimOptions& opt, HybridTrajectory& out) {
    if (!(duration > 0.0)) throw ConfigError("integrate_phase: duration must be positive");
    if (!(dt > 0.0) || dt > duration + kTimeEps) {
        throw ConfigError("integrate_phase: need 0 < dt <= duration");
    }

    if (out.samples.empty()) {
        out.samples.push_back({t0, x0, mode});
    }

    auto deriv = [&](double t, const HybridState::Vec& v) {
        return continuous_dynamics(mode, HybridState::from_vector(v), u(t), p, opt).to_vector();
    };

    HybridState::Vec v = x0.to_vector();
    double t = t0;
    const double t_end = t0 + duration;
    long step_index = 0;
    while (t < t_end - kTimeEps) {
        double h = std::min(dt, t_end - t);
        const HybridState::Vec k1 = deriv(t, v);
        const HybridState::Vec k2 = deriv(t + 0.5 * h, v + 0.5 * h * k1);
        const HybridState::Vec k3 = deriv(t + 0.5 * h, v + 0.5 * h * k2);
        const HybridState::Vec k4 = deriv(t + h, v + h * k3);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ++step_index;
        t = (t + h >= t_end - kTimeEps) ? t_end : t0 + static_cast<double>(step_index) * dt;
        if (!v.allFinite()) {
            throw NumericalError("non-finite state at t = " + std::to_string(t));
        }
        out.samples.push_back({t, HybridState::from_vector(v), mode});
    }
}

namespace {

struct ClutchLanding {
    double t = 0.0;
    bool is_brake = false;  // which clutch toggles
    bool engaged = false;   // its new state
};

void append_switch(HybridTrajectory& traj, double t, Mode from, Mode to,
                   const HybridState& before, const ActuatorParams& p) {
    const HybridState after = reset(to, before, p);
    const Eigen::VectorXd impulse = impact_impulse(to, before.xi_dot(), p);
    traj.events.push_back({t, from, to, impulse, before, after});
}

} // namespace

HybridTrajectory execute_schedule(const Schedule& schedule, const HybridState& x0,
                                  double dt, const ActuatorParams& p, const SimOptions& opt) {
    schedule.validate();
    if (!(dt > 0.0)) throw ConfigError("execute_schedule: dt must be positive");

    HybridTrajectory traj;
    traj.dt = dt;

    if (schedule.phases.empty()) {
        traj.samples.push_back({0.0, x0, Mode::Dec});
        return traj;
    }

    const Mode initial_mode = schedule.phases.front().mode;
    HybridState state = reset(initial_mode, x0, p);
    {
        const Eigen::VectorXd impulse = impact_impulse(initial_mode, x0.xi_dot(), p);
        if (impulse.size() > 0 && impulse.norm() > 1e-12) {
            traj.events.push_back({0.0, initial_mode, initial_mode, impulse, x0, state});
        }
    }

    const double total = schedule.total_duration();

    // Effective mode segments: without delays these are the scheduled phases;
    // with delays each commanded switch is expanded into per-clutch landings.
    struct Segment {
        double t_start;
        double t_end;
        Mode mode;
    };
    std::vector<Segment> segments;

    if (!opt.apply_delays) {
        double t = 0.0;
        for (const auto& ph : schedule.phases) {
            segments.push_back({t, t + ph.duration, ph.mode});
            t += ph.duration;
        }
    } else {
        std::vector<ClutchLanding> landings;
        double t_cmd = 0.0;
        ClutchState commanded = clutch_state(initial_mode);
        for (size_t i = 0; i + 1 < schedule.phases.size(); ++i) {
            t_cmd += schedule.phases[i].duration;
            const ClutchState next = clutch_state(schedule.phases[i + 1].mode);
            if (next.brake != commanded.brake) {
                landings.push_back({t_cmd + p.delay_brake, true, next.brake});
            }
            if (next.clutch != commanded.clutch) {
                landings.push_back({t_cmd + p.delay_clutch, false, next.clutch});
            }
            commanded = next;
        }
        std::stable_sort(landings.begin(), landings.end(),
                         [](const ClutchLanding& a, const ClutchLanding& b) { return a.t < b.t; });

        ClutchState actual = clutch_state(initial_mode);
        double t = 0.0;
        Mode current = initial_mode;
        for (size_t i = 0; i < landings.size();) {
            const double t_land = landings[i].t;
            if (t_land >= total - kTimeEps) break;
            while (i < landings.size() && landings[i].t <= t_land + kTimeEps) {
                if (landings[i].is_brake) actual.brake = landings[i].engaged;
                else actual.clutch = landings[i].engaged;
                ++i;
            }
            const Mode next = mode_from_clutches(actual);
            if (next != current) {
                if (t_land > t + kTimeEps) segments.push_back({t, t_land, current});
                t = t_land;
                current = next;
            }
        }
        if (total > t + kTimeEps) segments.push_back({t, total, current});
    }

    for (size_t i = 0; i < segments.size(); ++i) {
        const Segment& seg = segments[i];
        if (i > 0) {
            append_switch(traj, seg.t_start, segments[i - 1].mode, seg.mode, state, p);
            state = traj.events.back().after;
        }
        integrate_phase(seg.mode, state, schedule.control, seg.t_start,
                        seg.t_end - seg.t_start, dt, p, opt, traj);
        state = traj.samples.back().state;
    }

    return traj;
}

} // namespace bsa
