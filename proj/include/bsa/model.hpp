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

#ifndef BSA_MODEL_HPP
#define BSA_MODEL_HPP

#include <Eigen/Dense>
#include <string_view>

#include "bsa/params.hpp"

namespace bsa {

/**
 * @brief Clutch modes of the actuator.
 *
 * c1 brakes the spring-side body (psi_dot = 0), c2 couples it to the link
 * (psi_dot = q_dot):
 *
 *   DEC: c1=0 c2=0   no constraint
 *   SEA: c1=0 c2=1   psi_dot = q_dot
 *   STG: c1=1 c2=0   psi_dot = 0
 *   BRK: c1=1 c2=1   psi_dot = 0 and psi_dot = q_dot (everything locked)
 */
enum class Mode : int { Dec = 0, Sea = 1, Stg = 2, Brk = 3 };

const char* mode_name(Mode mode);
Mode mode_from_name(std::string_view name);  // throws ConfigError on unknown
Mode mode_from_id(int id);                   // throws ConfigError out of range

/// Engaged-state of the two clutches in a given mode.
struct ClutchState {
    bool brake = false;   // c1
    bool clutch = false;  // c2
};
ClutchState clutch_state(Mode mode);
Mode mode_from_clutches(ClutchState cs);

/// Spring constitutive law. Linear is the default used by the optimizer.
enum class SpringLaw { Linear, BoucWen };

/// Which magnitude the middle Bouc-Wen term uses:
/// RateMagnitude:       h_dot = a*phi_dot - b*|phi_dot|*h - g*phi_dot*|h|
/// DeflectionMagnitude: h_dot = a*phi_dot - b*|phi|*h     - g*phi_dot*|h|
enum class HysteresisForm { RateMagnitude, DeflectionMagnitude };

/**
 * @brief Continuous state of the hybrid actuator model.
 *
 * theta is the motor position (a velocity-source integrator), xi = [psi, q]
 * the spring-output and link positions, and h the Bouc-Wen internal state
 * (ignored under the linear spring law).
 */
struct HybridState {
    double theta = 0.0;
    double psi = 0.0;
    double q = 0.0;
    double psi_dot = 0.0;
    double q_dot = 0.0;
    double h = 0.0;

    using Vec = Eigen::Matrix<double, 6, 1>;

    Eigen::Vector2d xi_dot() const { return {psi_dot, q_dot}; }
    double phi() const { return theta - psi; }

    Vec to_vector() const;
    static HybridState from_vector(const Vec& v);
    bool all_finite() const;
};

/**
 * @brief Velocity-constraint matrix C of a mode, acting on xi_dot = [psi_dot, q_dot].
 *
 * DEC -> 0x2 (empty), SEA -> [1 -1], STG -> [1 0], BRK -> [[1 0], [1 -1]].
 */
Eigen::MatrixXd constraint_matrix(Mode mode);

/// Spring torque: K*phi for Linear, K*(phi - h) for BoucWen, phi = theta - psi.
double spring_torque(double theta, double psi, double h, SpringLaw law,
                     const ActuatorParams& p);

/// Bouc-Wen internal-state rate along a deflection trajectory.
double hysteresis_rate(double phi, double phi_dot, double h, const ActuatorParams& p,
                       HysteresisForm form = HysteresisForm::RateMagnitude);

/**
 * @brief Dissipative Coulomb + viscous bearing friction on [psi, q].
 *
 * tau_f = [tauC_psi*sgn(psi_dot) + d_psi*psi_dot,
 *          tauC_q  *sgn(q_dot)   + d_q  *q_dot],
 * entering the dynamics on the resisting side. When @p smoothed, sgn(v) is
 * replaced by tanh(v / eps_sign).
 */
Eigen::Vector2d friction_torque(double psi_dot, double q_dot, const ActuatorParams& p,
                                bool smoothed);

/// Gravity vector [0, m*g*l*sin(q)] on [psi, q].
Eigen::Vector2d gravity_vector(double q, const ActuatorParams& p);

/// Kinetic / potential energy split of a state.
struct Energy {
    double kinetic = 0.0;
    double potential = 0.0;
    double total() const { return kinetic + potential; }
};

/**
 * @brief E_k = 1/2 J_psi psi_dot^2 + 1/2 J_q q_dot^2;
 *        E_p = 1/2 K (phi - h_eff)^2 + m g l (1 - cos q),
 * with h_eff = h under BoucWen and 0 under Linear (consistent with the
 * torque each law produces).
 */
Energy energy(const HybridState& x, const ActuatorParams& p, SpringLaw law);

} // namespace bsa

#endif // BSA_MODEL_HPP
