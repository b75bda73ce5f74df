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

#ifndef BSA_IDENTIFY_HPP
#define BSA_IDENTIFY_HPP

#include <optional>
#include <vector>

#include "bsa/model.hpp"

namespace bsa {

/// Spring loading/unloading record: deflection and torque over time.
struct LoadingCycleData {
    std::vector<double> t;    // strictly increasing [s]
    std::vector<double> phi;  // deflection [rad]
    std::vector<double> tau;  // spring torque [Nm]
    double theta_dot_set = 0.0;
    int cycles = 0;
};

/// Command/response channel pair for engagement-delay estimation.
struct DelayLog {
    std::vector<double> t_cmd;
    std::vector<double> cmd;  // commanded clutch state (0/1)
    std::vector<double> t_resp;
    std::vector<double> resp;
};

/**
 * @brief Synthesizes spring loading cycles: brake engaged, motor alternating
 * between +/- theta_dot_set at the +/- theta_lim end stops, Bouc-Wen torque.
 *
 * The record starts with the ramp 0 -> +theta_lim and then runs the given
 * number of full load/unload cycles (one reversal pair each).
 */
LoadingCycleData generate_cycles(const ActuatorParams& p, double theta_dot_set,
                                 double theta_lim, int cycles, double dt,
                                 HysteresisForm form = HysteresisForm::RateMagnitude);

/// Least-squares stiffness through the origin; throws ConfigError on
/// degenerate input (fewer than 10 samples or all-zero deflection).
double fit_stiffness(const LoadingCycleData& data);

struct BoucWenFit {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double K = 0.0;
    bool K_fixed = true;
    double rms_residual = 0.0;
    bool converged = false;
    int iterations = 0;
};

/**
 * @brief Nonlinear least-squares fit of the Bouc-Wen shaping factors.
 *
 * Minimizes sum (tau_model - tau_data)^2 where tau_model integrates the
 * hysteresis ODE along the measured phi(t). Levenberg-Marquardt from a
 * log-spaced grid of starts; K is fixed when given, otherwise free.
 */
BoucWenFit fit_bouc_wen(const LoadingCycleData& data, std::optional<double> fixed_K,
                        HysteresisForm form = HysteresisForm::RateMagnitude);

/// Mean command-edge -> response-threshold-crossing delay; the threshold is
/// the given fraction of the steady response change after each edge. Throws
/// ConfigError when no edge or no crossing exists.
double estimate_delay(const DelayLog& log, double threshold_fraction = 0.05);

/// Enclosed phi-tau loop area per cycle (energy dissipated by hysteresis).
double loop_area_per_cycle(const LoadingCycleData& data);

/// Simulated clutch-delay experiment: the link falls in DEC from q0 while the
/// spring side rests, then the link clutch is commanded; the response channel
/// is psi_dot, which jumps through the engagement impulse `delay` seconds
/// after the command.
DelayLog generate_delay_log(const ActuatorParams& p, double delay, double q0, double dt);

} // namespace bsa

#endif // BSA_IDENTIFY_HPP
