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

// Smooth implicit gradients of one simulation step. The step map is kept
// smooth by holding the central-path parameter at a fixed relaxation
// kappa_grad; the sensitivity is -Rbar^{-1} Dbar at that central-path point.

#ifndef DOJO_DIFF_HPP_
#define DOJO_DIFF_HPP_

#include "dojo/ncp.hpp"
#include "dojo/sim.hpp"

namespace dojo {

inline constexpr double kDefaultKappaGrad = 3e-4;

// Tangent-space Jacobians of z_next; orientation rows/columns are 3-wide.
struct StepJacobians {
  MatX d_zprev;   // 6N x 6N
  MatX d_z;       // 6N x 6N
  MatX d_u;       // 6N x 6N
  MatX d_params;  // 6N x (P + 3P + N + 6N + 1): c_f, offsets, m, J, h
  double kappa_grad = 0.0;
  bool used_fallback_point = false;  // no cached iterate at kappa_grad
  ThetaLayout theta;
};

// Differentiates the step at the cached kappa_grad central-path point
// (polished by a few fixed-kappa Newton iterations before applying the
// implicit function theorem). Falls back to the final solution with a
// warning flag when no cached point exists.
StepJacobians implicit_step_gradients(const NcpProblem& problem,
                                      const SolveResult& result,
                                      double kappa_grad,
                                      const SolverOptions& opts,
                                      bool params_only = false);

// Full sensitivity -Rbar^{-1} Dbar (all rows of w) at the same point.
MatX implicit_sensitivity(const NcpProblem& problem, const SolveResult& result,
                          double kappa_grad, const SolverOptions& opts,
                          bool* used_fallback = nullptr);

// The kappa-fixed step map: continuation stopped at kappa_fixed, then
// polished to the central-path point. Shared by gradients and the oracle.
struct RelaxedStep {
  std::shared_ptr<NcpProblem> problem;
  SolveResult solve;
  std::vector<BodyConfig> z_next;
};

RelaxedStep relaxed_step(const Mechanism& mech, const SimState& state,
                         const std::vector<BodyInput>& u, double kappa_fixed,
                         const SolverOptions& opts);

// Central finite difference of the kappa-fixed step map along a theta
// tangent direction; quaternion perturbations go through phi_map. Returns
// the 6N tangent-space directional derivative of z_next.
VecX fd_step_oracle(const Mechanism& mech, const SimState& state,
                    const std::vector<BodyInput>& u,
                    const VecX& theta_direction, double delta,
                    double kappa_fixed, const SolverOptions& opts);

// Applies theta += delta * direction to a copy of the inputs.
void apply_theta_perturbation(const ThetaLayout& layout,
                              const VecX& direction, double delta,
                              Mechanism* mech, SimState* state,
                              std::vector<BodyInput>* u);

// Tangent-space difference (za ⊖ zb)/scale, 6 entries per body.
VecX config_tangent_difference(const std::vector<BodyConfig>& za,
                               const std::vector<BodyConfig>& zb,
                               double scale);

}  // namespace dojo

#endif  // DOJO_DIFF_HPP_
