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

#ifndef BSA_COMMANDS_HPP
#define BSA_COMMANDS_HPP

#include <string>

#include "bsa/params.hpp"

namespace bsa {

/**
 * @brief File-level command implementations shared by the C API and CLI.
 *
 * Each command parses its JSON configuration, runs, and writes its artifacts
 * plus a manifest.json (command, echoed config, config hash, parameter set,
 * result summary) into @p out_dir. Outputs are deterministic for a given
 * (params, config) pair. Errors are reported through the exception types in
 * errors.hpp; sweeps with partly failed grid points throw PartialFailure
 * after writing all outputs.
 */
void cmd_simulate(const ActuatorParams& params, const std::string& config_json,
                  const std::string& out_dir);
void cmd_optimize(const ActuatorParams& params, const std::string& config_json,
                  const std::string& out_dir);
void cmd_sweep_final_time(const ActuatorParams& params, const std::string& config_json,
                          const std::string& out_dir);
void cmd_sweep_initial_angle(const ActuatorParams& params, const std::string& config_json,
                             const std::string& out_dir);
void cmd_identify(const ActuatorParams& params, const std::string& config_json,
                  const std::string& out_dir);
void cmd_energy(const ActuatorParams& params, const std::string& config_json,
                const std::string& out_dir);

} // namespace bsa

#endif // BSA_COMMANDS_HPP
