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

#ifndef BSA_IO_HPP
#define BSA_IO_HPP

#include <string>

#include "bsa/experiments.hpp"
#include "bsa/identify.hpp"
#include "bsa/sim.hpp"
#include "bsa/trajopt.hpp"

namespace bsa {

/**
 * @brief Trajectory CSV: t,mode,theta,psi,q,psi_dot,q_dot,h,tau_s,E_k,E_p.
 * Events CSV: t,from,to,Lambda_1,Lambda_2 (absent impulse entries are 0).
 */
void write_trajectory_csv(const HybridTrajectory& traj, const ActuatorParams& params,
                          SpringLaw law, const std::string& samples_path,
                          const std::string& events_path);

/// Reads a trajectory CSV written by write_trajectory_csv (events not needed).
HybridTrajectory read_trajectory_csv(const std::string& samples_path);

/// Energy CSV: t,mode,E_k,E_p,E_total.
void write_energy_csv(const HybridTrajectory& traj, const ActuatorParams& params, SpringLaw law,
                      const std::string& path);

/// Solution node table: phase,node,t,u,theta,psi,q,psi_dot,q_dot.
void write_solution_nodes_csv(const Solution& sol, const std::string& path);

/// Sweep summary CSV: grid_value,plan,mean,std,fit_residual,successes.
void write_sweep_summary_csv(const SweepResult& result, const std::string& path);

/// Per-run sweep records CSV.
void write_sweep_runs_csv(const SweepResult& result, const std::string& path);

/// Loading-cycle CSV: t,phi,tau.
void write_cycles_csv(const LoadingCycleData& data, const std::string& path);
LoadingCycleData read_cycles_csv(const std::string& path);

/// Delay-log CSV: channel,t,value with channel in {cmd, resp}.
void write_delay_log_csv(const DelayLog& log, const std::string& path);
DelayLog read_delay_log_csv(const std::string& path);

/// FNV-1a hash of a canonical config string, as fixed-width hex.
std::string config_hash(const std::string& canonical);

} // namespace bsa

#endif // BSA_IO_HPP
