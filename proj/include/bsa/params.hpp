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

#ifndef BSA_PARAMS_HPP
#define BSA_PARAMS_HPP

#include <map>
#include <string>

namespace bsa {

/**
 * @brief Physical constants of the bi-stiffness actuator prototype.
 *
 * Defaults are the prototype values. J_psi aggregates the whole spring-side
 * chain (spring output, torque-sensor input/output, brake, clutch bodies);
 * the motor-side inertia does not appear because the motor is reduced to a
 * velocity source u = theta_dot.
 *
 * Immutable value object by convention: construct, validate, share freely.
 */
struct ActuatorParams {
    // Inertias [kg m^2]
    double J_psi = 8.28e-3;  ///< spring-side body (S_o + T_i + T_o + B + C_i)
    double J_q = 5.2e-2;     ///< link (consistent with the 1.2 kg / 0.2 m CoM link)

    // Link gravity
    double mass = 1.2;   ///< link mass [kg]
    double com = 0.2;    ///< link centre-of-mass distance [m]
    double grav = 9.81;  ///< gravitational acceleration [m/s^2]

    // Spring
    double K = 15.0;  ///< stiffness [Nm/rad]

    // Friction
    double tauC_psi = 0.11;  ///< spring-side Coulomb magnitude [Nm]
    double tauC_q = 0.28;    ///< link Coulomb magnitude [Nm]
    double d_psi = 0.04;     ///< spring-side viscous damping [kg m^2/s]
    double d_q = 0.08;       ///< link viscous damping [kg m^2/s]

    // Bouc-Wen hysteresis shaping factors [-]
    double alpha = 0.08;
    double beta = 2.0;
    double gamma = 0.6;

    // Limits
    double phi_max = 0.3;      ///< max spring deflection [rad]
    double tau_s_max = 4.5;    ///< max spring torque [Nm]
    double theta_range = 1.2;  ///< motor angle bound [rad]
    double u_max = 1.75;       ///< sustained motor velocity bound under load [rad/s]

    // Electromechanical engagement delays [s]
    double delay_brake = 0.022;   ///< spring brake (psi_dot = 0 clutch)
    double delay_clutch = 0.023;  ///< link clutch (psi_dot = q_dot clutch)

    /// Smoothing width for sign() in optimization-facing dynamics [rad/s].
    double eps_sign = 1e-2;

    /// Gravity torque scale m*g*l [Nm].
    double mgl() const { return mass * grav * com; }

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/**
 * @brief Builds ActuatorParams from module-level key/value rows.
 *
 * J_psi is the sum of the spring-chain rows S_o, T_i, T_o, B, C_i (all five
 * required unless J_psi is given directly); the link inertia comes from L
 * (or J_q). Remaining keys map one-to-one onto ActuatorParams fields and
 * fall back to defaults when absent. Unknown keys raise ConfigError.
 */
ActuatorParams aggregate_params(const std::map<std::string, double>& values);

/// Reads a key = value parameter file (# comments allowed) via aggregate_params.
ActuatorParams load_params(const std::string& path);

/// Writes the parameter file form of @p p (module rows collapsed to J_psi).
void save_params(const ActuatorParams& p, const std::string& path);

/// Field-name/value view of @p p, matching the parameter-file keys.
std::map<std::string, double> params_to_key_values(const ActuatorParams& p);

} // namespace bsa

#endif // BSA_PARAMS_HPP
