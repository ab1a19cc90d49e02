// Copyright 2026 The Dojo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Time-stepping simulation loop, state management, and per-step diagnostics.

#ifndef DOJO_SIM_HPP_
#define DOJO_SIM_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dojo/ncp.hpp"

namespace dojo {

// Two consecutive configurations; velocities are finite differences.
struct SimState {
  std::vector<BodyConfig> z_prev;
  std::vector<BodyConfig> z_curr;
};

struct StepDiagnostics {
  double energy = 0.0;            // J, diagnostic approximation
  Vec3 linear_momentum = Vec3::Zero();   // kg m/s
  Vec3 angular_momentum = Vec3::Zero();  // kg m^2/s, about the world origin
  double min_phi = 0.0;           // m, over contacts (0 when none)
  int iterations = 0;
};

struct StepResult {
  std::vector<BodyConfig> z_next;
  VecX joint_impulses;
  std::vector<ContactVars> contacts;
  std::shared_ptr<NcpProblem> problem;
  SolveResult solve;
};

struct Trajectory {
  double h = 0.0;
  std::vector<SimState> states;                    // T+1 snapshots
  std::vector<std::vector<ContactVars>> impulses;  // per step
  std::vector<std::vector<BodyInput>> controls;    // per step
  std::vector<StepDiagnostics> diagnostics;        // per step
};

class SimError : public std::runtime_error {
 public:
  SimError(const std::string& what, int step_index, SolveStatus status)
      : std::runtime_error(what), step_index(step_index), status(status) {}
  int step_index;
  SolveStatus status;
};

// Advances one step: assembles the NCP, solves it, and returns the next
// configuration with impulses. `warm` reuses the previous step's cone
// variables and joint impulses (re-projected to the interior margin).
StepResult step(const Mechanism& mech, const SimState& state,
                const std::vector<BodyInput>& u, const SolverOptions& opts,
                const StepResult* warm = nullptr);

SimState advance(const SimState& state, const StepResult& result);

using Controller = std::function<std::vector<BodyInput>(int step_index)>;

Trajectory simulate(const Mechanism& mech, const SimState& initial,
                    const Controller& controller, int t_steps,
                    const SolverOptions& opts, bool warm_start = true);

// Backs out z_prev so finite differences reproduce the requested velocities:
// p_prev = p - h v and q_prev = q ⊗ phi_map(h omega / 2)^-1 (omega body frame).
SimState init_from_velocity(const Mechanism& mech,
                            const std::vector<BodyConfig>& configs,
                            const std::vector<Vec3>& linear_vels,
                            const std::vector<Vec3>& angular_vels);

// Diagnostics for the interval (z, z_next). The angular momentum is the
// discrete quantity the integrator conserves exactly for free motion.
StepDiagnostics step_diagnostics(const Mechanism& mech,
                                 const std::vector<BodyConfig>& z,
                                 const std::vector<BodyConfig>& z_next,
                                 int iterations);

// CSV export: step, time, per-body p and q, per-contact gamma/b/phi, then
// diagnostics; 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const Mechanism& mech,
                          const std::string& path);

}  // namespace dojo

#endif  // DOJO_SIM_HPP_
