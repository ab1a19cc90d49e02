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

#include "dojo/diff.hpp"

#include <stdexcept>

namespace dojo {

MatX implicit_sensitivity(const NcpProblem& problem, const SolveResult& result,
                          double kappa_grad, const SolverOptions& opts,
                          bool* used_fallback) {
  SolverPoint start = result.w;
  bool fallback = true;
  if (result.kappa_grad_point) {
    start = *result.kappa_grad_point;
    fallback = false;
  }
  if (used_fallback != nullptr) *used_fallback = fallback;

  // Land exactly on the central path at kappa_grad before differentiating.
  SolveResult polished = solve_relaxed(problem, start, opts, kappa_grad);
  if (polished.status != SolveStatus::kConverged) {
    throw std::runtime_error("implicit gradients: fixed-kappa polish failed");
  }

  BlockMatrix rbar(&problem.structure());
  problem.jacobian(polished.w, &rbar);
  BlockFactorization factor;
  if (!factor.factor(rbar)) {
    throw std::runtime_error("implicit gradients: singular Jacobian");
  }
  const MatX dbar = problem.data_jacobian(polished.w);
  // Column parallelism only pays off once the back-substitution is large
  // enough to amortize thread start-up.
  const bool parallel = opts.parallel_sensitivity && dbar.size() > 65536;
  return factor.solve_multi(-dbar, parallel);
}

StepJacobians implicit_step_gradients(const NcpProblem& problem,
                                      const SolveResult& result,
                                      double kappa_grad,
                                      const SolverOptions& opts,
                                      bool params_only) {
  StepJacobians out;
  out.kappa_grad = kappa_grad;
  out.theta = problem.theta_layout();
  const int nz = 6 * problem.num_bodies();
  const ThetaLayout& th = out.theta;
  if (params_only) {
    SolverPoint start = result.w;
    out.used_fallback_point = !result.kappa_grad_point.has_value();
    if (result.kappa_grad_point) start = *result.kappa_grad_point;
    SolveResult polished = solve_relaxed(problem, start, opts, kappa_grad);
    if (polished.status != SolveStatus::kConverged) {
      throw std::runtime_error("implicit gradients: fixed-kappa polish failed");
    }
    BlockMatrix rbar(&problem.structure());
    problem.jacobian(polished.w, &rbar);
    BlockFactorization factor;
    if (!factor.factor(rbar)) {
      throw std::runtime_error("implicit gradients: singular Jacobian");
    }
    const MatX dbar = problem.data_jacobian_params(polished.w);
    const bool parallel = opts.parallel_sensitivity && dbar.size() > 65536;
    out.d_params = factor.solve_multi(-dbar, parallel).topRows(nz);
    return out;
  }
  const MatX sens = implicit_sensitivity(problem, result, kappa_grad, opts,
                                         &out.used_fallback_point);
  const MatX top = sens.topRows(nz);
  out.d_zprev = top.middleCols(th.zprev, 6 * th.n_bodies);
  out.d_z = top.middleCols(th.z, 6 * th.n_bodies);
  out.d_u = top.middleCols(th.u, 6 * th.n_bodies);
  out.d_params = top.rightCols(th.total - th.cf);
  return out;
}

RelaxedStep relaxed_step(const Mechanism& mech, const SimState& state,
                         const std::vector<BodyInput>& u, double kappa_fixed,
                         const SolverOptions& opts) {
  RelaxedStep out;
  out.problem =
      std::make_shared<NcpProblem>(mech, state.z_prev, state.z_curr, u);
  SolverOptions run = opts;
  // Stop the continuation at kappa_fixed, then polish onto the path.
  run.kappa_tol = 5.0 * kappa_fixed;
  SolveResult coarse = solve(*out.problem, out.problem->cold_start(), run);
  if (coarse.status != SolveStatus::kConverged) {
    throw SimError("relaxed_step: solver failed", -1, coarse.status);
  }
  out.solve = solve_relaxed(*out.problem, coarse.w, opts, kappa_fixed);
  if (out.solve.status != SolveStatus::kConverged) {
    throw SimError("relaxed_step: fixed-kappa polish failed", -1,
                   out.solve.status);
  }
  out.z_next = out.problem->extract_z_next(out.solve.w);
  return out;
}

void apply_theta_perturbation(const ThetaLayout& layout,
                              const VecX& direction, double delta,
                              Mechanism* mech, SimState* state,
                              std::vector<BodyInput>* u) {
  const int nb = layout.n_bodies;
  auto perturb_config = [&](BodyConfig* cfg, int col0) {
    cfg->p += delta * direction.segment<3>(col0);
    const Vec3 dq = delta * direction.segment<3>(col0 + 3);
    if (dq.squaredNorm() > 0.0) cfg->q = quat_mul(cfg->q, phi_map(dq));
  };
  for (int i = 0; i < nb; ++i) {
    perturb_config(&state->z_prev[i], layout.zprev + 6 * i);
    perturb_config(&state->z_curr[i], layout.z + 6 * i);
    (*u)[i].f += delta * direction.segment<3>(layout.u + 6 * i);
    (*u)[i].tau += delta * direction.segment<3>(layout.u + 6 * i + 3);
    mech->bodies[i].m += delta * direction(layout.mass + i);
    const int jc = layout.inertia + 6 * i;
    Mat3 dj;
    dj << direction(jc), direction(jc + 1), direction(jc + 2),
        direction(jc + 1), direction(jc + 3), direction(jc + 4),
        direction(jc + 2), direction(jc + 4), direction(jc + 5);
    mech->bodies[i].J += delta * dj;
  }
  for (int c = 0; c < layout.n_contacts; ++c) {
    mech->contacts[c].friction += delta * direction(layout.cf + c);
    mech->contacts[c].offset +=
        delta * direction.segment<3>(layout.offsets + 3 * c);
  }
  mech->timestep += delta * direction(layout.h);
}

VecX config_tangent_difference(const std::vector<BodyConfig>& za,
                               const std::vector<BodyConfig>& zb,
                               double scale) {
  VecX out(6 * za.size());
  for (size_t i = 0; i < za.size(); ++i) {
    out.segment<3>(6 * i) = (za[i].p - zb[i].p) / scale;
    out.segment<3>(6 * i + 3) =
        quat_mul(zb[i].q.conjugate(), za[i].q).v / scale;
  }
  return out;
}

VecX fd_step_oracle(const Mechanism& mech, const SimState& state,
                    const std::vector<BodyInput>& u,
                    const VecX& theta_direction, double delta,
                    double kappa_fixed, const SolverOptions& opts) {
  if (delta <= 0.0) throw std::invalid_argument("fd_step_oracle: delta <= 0");
  const ThetaLayout layout =
      ThetaLayout::make(static_cast<int>(mech.bodies.size()),
                        static_cast<int>(mech.contacts.size()));
  if (theta_direction.size() != layout.total) {
    throw std::invalid_argument("fd_step_oracle: direction size mismatch");
  }
  auto eval = [&](double sign) {
    Mechanism m = mech;
    SimState s = state;
    std::vector<BodyInput> uu = u;
    uu.resize(mech.bodies.size());
    apply_theta_perturbation(layout, theta_direction, sign * delta, &m, &s, &uu);
    return relaxed_step(m, s, uu, kappa_fixed, opts).z_next;
  };
  const std::vector<BodyConfig> plus = eval(1.0);
  const std::vector<BodyConfig> minus = eval(-1.0);
  return config_tangent_difference(plus, minus, 2.0 * delta);
}

}  // namespace dojo
