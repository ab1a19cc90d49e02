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

// Gauss-Newton identification of box contact geometry and friction from
// one-step prediction errors on configuration triplets.

#ifndef DOJO_SYSID_HPP_
#define DOJO_SYSID_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dojo/models.hpp"
#include "dojo/sim.hpp"

namespace dojo {

// Learnable parameters: friction coefficient plus the 8 body-frame vertex
// positions, packed as (c_f, v1..v8) = 25 values.
struct SysidParams {
  double c_f = 0.4;
  std::vector<Vec3> vertices;  // size 8

  VecX pack() const;
  static SysidParams unpack(const VecX& x);
};

struct Triplet {
  int traj_id = 0;
  int step = 0;
  std::vector<BodyConfig> z_prev, z, z_next;
};

using Dataset = std::vector<Triplet>;

struct SysidConfig {
  double mass = 1.0;
  double half_extent = 0.25;  // fixes the (known) inertia
  double timestep = 0.01;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  ConeMode cone_mode = ConeMode::kNonlinear;
  double kappa_grad = 3e-4;
  SolverOptions opts;
  bool parallel = true;
};

Mechanism sysid_mechanism(const SysidParams& params, const SysidConfig& cfg);

// Sum over triplets of 0.5 * ||step(z-, z; theta) - z+||_W^2 with orientation
// differences measured in tangent space. Failed solves are skipped and
// counted.
double sysid_loss(const Dataset& dataset, const SysidParams& params,
                  const SysidConfig& cfg, const VecX& weights = VecX(),
                  int* skipped = nullptr);

struct SysidResult {
  SysidParams params;
  std::vector<double> loss_trace;
  std::vector<double> damping_trace;
  bool converged = false;
  int iterations = 0;
  int skipped = 0;
  MatX final_hessian;  // Gauss-Newton approximation at the solution
};

// Levenberg-damped Gauss-Newton on the triplet prediction loss; gradients
// come from the implicit step sensitivities at kappa_grad.
SysidResult sysid_fit(const Dataset& dataset, const SysidParams& theta0,
                      const SysidConfig& cfg, const VecX& weights = VecX(),
                      int max_gn_iters = 30);

// Simulated box tosses with randomized initial conditions, decomposed into
// T-2 triplets of consecutive configurations (T configurations per
// trajectory). Optional Gaussian configuration noise.
Dataset make_synthetic_dataset(const SysidParams& truth, const SysidConfig& cfg,
                               int n_traj, std::uint64_t seed,
                               double noise_std, int t_configs = 100);

void write_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset read_dataset_csv(const std::string& path, int n_bodies = 1);

}  // namespace dojo

#endif  // DOJO_SYSID_HPP_
