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

#include "bsa/model.hpp"

#include <cmath>

#include "bsa/errors.hpp"

namespace bsa {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::Dec: return "DEC";
        case Mode::Sea: return "SEA";
        case Mode::Stg: return "STG";
        case Mode::Brk: return "BRK";
    }
    return "?";
}

Mode mode_from_name(std::string_view name) {
    if (name == "DEC" || name == "dec") return Mode::Dec;
    if (name == "SEA" || name == "sea") return Mode::Sea;
    if (name == "STG" || name == "stg") return Mode::Stg;
    if (name == "BRK" || name == "brk") return Mode::Brk;
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected DEC|SEA|STG|BRK)");
}

Mode mode_from_id(int id) {
    if (id < 0 || id > 3) throw ConfigError("mode id " + std::to_string(id) + " out of range 0..3");
    return static_cast<Mode>(id);
}

ClutchState clutch_state(Mode mode) {
    switch (mode) {
        case Mode::Dec: return {false, false};
        case Mode::Sea: return {false, true};
        case Mode::Stg: return {true, false};
        case Mode::Brk: return {true, true};
    }
    return {};
}

Mode mode_from_clutches(ClutchState cs) {
    if (cs.brake) return cs.clutch ? Mode::Brk : Mode::Stg;
    return cs.clutch ? Mode::Sea : Mode::Dec;
}

HybridState::Vec HybridState::to_vector() const {
    Vec v;
    v << theta, psi, q, psi_dot, q_dot, h;
    return v;
}

HybridState HybridState::from_vector(const Vec& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

bool HybridState::all_finite() const {
    return std::isfinite(theta) && std::isfinite(psi) && std::isfinite(q) &&
           std::isfinite(psi_dot) && std::isfinite(q_dot) && std::isfinite(h);
}

Eigen::MatrixXd constraint_matrix(Mode mode) {
    switch (mode) {
        case Mode::Dec:
            return Eigen::MatrixXd(0, 2);
        case Mode::Sea: {
            Eigen::MatrixXd c(1, 2);
            c << 1.0, -1.0;
            return c;
        }
        case Mode::Stg: {
            Eigen::MatrixXd c(1, 2);
            c << 1.0, 0.0;
            return c;
        }
        case Mode::Brk: {
            Eigen::MatrixXd c(2, 2);
            c << 1.0, 0.0,
                 1.0, -1.0;
            return c;
        }
    }
    return Eigen::MatrixXd(0, 2);
}

double spring_torque(double theta, double psi, double h, SpringLaw law,
                     const ActuatorParams& p) {
    const double phi = theta - psi;
    return law == SpringLaw::BoucWen ? p.K * (phi - h) : p.K * phi;
}

double hysteresis_rate(double phi, double phi_dot, double h, const ActuatorParams& p,
                       HysteresisForm form) {
    const double mid = form == HysteresisForm::RateMagnitude ? std::abs(phi_dot) : std::abs(phi);
    return p.alpha * phi_dot - p.beta * mid * h - p.gamma * phi_dot * std::abs(h);
}

namespace {
inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
} // namespace

Eigen::Vector2d friction_torque(double psi_dot, double q_dot, const ActuatorParams& p,
                                bool smoothed) {
    const double s_psi = smoothed ? std::tanh(psi_dot / p.eps_sign) : sgn(psi_dot);
    const double s_q = smoothed ? std::tanh(q_dot / p.eps_sign) : sgn(q_dot);
    return {p.tauC_psi * s_psi + p.d_psi * psi_dot,
            p.tauC_q * s_q + p.d_q * q_dot};
}

Eigen::Vector2d gravity_vector(double q, const ActuatorParams& p) {
    return {0.0, p.mgl() * std::sin(q)};
}

Energy energy(const HybridState& x, const ActuatorParams& p, SpringLaw law) {
    Energy e;
    e.kinetic = 0.5 * p.J_psi * x.psi_dot * x.psi_dot + 0.5 * p.J_q * x.q_dot * x.q_dot;
    const double deflection = law == SpringLaw::BoucWen ? x.phi() - x.h : x.phi();
    e.potential = 0.5 * p.K * deflection * deflection + p.mgl() * (1.0 - std::cos(x.q));
    return e;
}

} // namespace bsa
