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

#ifndef BSA_CONFIG_HPP
#define BSA_CONFIG_HPP

#include <string>

#include "bsa/experiments.hpp"
#include "bsa/sim.hpp"
#include "bsa/trajopt.hpp"

namespace bsa {

/// Parsed `simulate` command configuration.
struct SimulateConfig {
    Schedule schedule;
    HybridState initial_state;
    double dt = 1e-4;
    SimOptions options;
};

/// Parsed `optimize` command configuration.
struct OptimizeConfig {
    PhasePlan plan;
    CollocationConfig colloc;
    OcpBoundary boundary;
    std::optional<PathBounds> path_bounds;
    double dt_replay = 1e-4;
};

/// Parsed `identify` command configuration.
struct IdentifyConfig {
    double theta_dot_set = 2.0;
    double theta_lim = 0.29;
    int cycles = 10;
    double dt = 1e-3;
    std::string input_csv;      // fit an existing record instead of generating
    double noise = 0.0;         // additive torque noise fraction
    unsigned seed = 0;
    bool fit_K = true;          // free K in the Bouc-Wen fit
    double delay_inject = 0.022;
    double delay_dt = 1e-4;
    double delay_threshold = 0.05;
    HysteresisForm form = HysteresisForm::RateMagnitude;
};

/// Parsed `energy` command configuration.
struct EnergyConfig {
    std::string input_csv;
    SpringLaw law = SpringLaw::Linear;
};

SimulateConfig parse_simulate_config(const std::string& json_text);
OptimizeConfig parse_optimize_config(const std::string& json_text);
SweepSpec parse_sweep_config(const std::string& json_text, SweepKind kind);
IdentifyConfig parse_identify_config(const std::string& json_text);
EnergyConfig parse_energy_config(const std::string& json_text);

/// Angle literal: plain number (radians) or string with a unit suffix,
/// e.g. "30 deg" or "0.52 rad".
double parse_angle(const std::string& text);

/// Canonical (sorted-key, compact) dump of a JSON document for hashing.
std::string canonical_json(const std::string& json_text);

} // namespace bsa

#endif // BSA_CONFIG_HPP
