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

#include "dojo/sim.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dojo {

StepResult step(const Mechanism& mech, const SimState& state,
                const std::vector<BodyInput>& u, const SolverOptions& opts,
                const StepResult* warm) {
  StepResult out;
  out.problem = std::make_shared<NcpProblem>(mech, state.z_prev, state.z_curr, u);
  SolverPoint w0 = out.problem->cold_start();
  if (warm != nullptr && warm->solve.status == SolveStatus::kConverged &&
      warm->solve.w.b.size() == w0.b.size()) {
    w0.b = warm->solve.w.b;
    w0.c = warm->solve.w.c;
    const int nj = static_cast<int>(warm->joint_impulses.size());
    if (nj > 0) w0.a.tail(nj) = warm->joint_impulses;
  }
  out.solve = solve(*out.problem, w0, opts);
  if (out.solve.status != SolveStatus::kConverged) {
    throw SimError(std::string("step: solver failed with status ") +
                       to_string(out.solve.status),
                   -1, out.solve.status);
  }
  // Pin the step map to the central-path point at the kappa floor so the
  // converged state is independent of the solve path (warm vs. cold start).
  if (out.problem->cones().total() > 0) {
    const double kappa_floor = opts.kappa_tol / 5.0;
    const double polish_tol = std::min(opts.r_tol, 1e-11);
    SolveResult polished =
        solve_relaxed(*out.problem, out.solve.w, opts, kappa_floor, polish_tol);
    if (polished.status == SolveStatus::kConverged) {
      polished.kappa_grad_point = out.solve.kappa_grad_point;
      polished.iterations += out.solve.iterations;
      out.solve = std::move(polished);
    }
  }
  out.z_next = out.problem->extract_z_next(out.solve.w);
  out.joint_impulses = out.problem->extract_joint_impulses(out.solve.w);
  out.contacts = out.problem->extract_contacts(out.solve.w);
  return out;
}

SimState advance(const SimState& state, const StepResult& result) {
  return SimState{state.z_curr, result.z_next};
}

StepDiagnostics step_diagnostics(const Mechanism& mech,
                                 const std::vector<BodyConfig>& z,
                                 const std::vector<BodyConfig>& z_next,
                                 int iterations) {
  StepDiagnostics diag;
  diag.iterations = iterations;
  const double h = mech.timestep;
  for (size_t i = 0; i < mech.bodies.size(); ++i) {
    const Body& body = mech.bodies[i];
    const Vec3 v = (z_next[i].p - z[i].p) / h;
    const Vec3 psi_next = psi_from_configs(z[i].q, z_next[i].q);
    const Vec3 omega = 2.0 / h * psi_next;  // body frame, first order

    diag.linear_momentum += body.m * v;
    // Discrete spin momentum conserved by the integrator, mapped to world.
    diag.angular_momentum +=
        z[i].p.cross(body.m * v) +
        2.0 / h * rotate(z[i].q, rot_momentum(body.J, psi_next));
    diag.energy += 0.5 * body.m * v.squaredNorm() +
                   0.5 * omega.dot(body.J * omega) -
                   body.m * mech.gravity.dot(0.5 * (z[i].p + z_next[i].p));
  }
  diag.min_phi = 0.0;
  if (!mech.contacts.empty()) {
    diag.min_phi = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < mech.contacts.size(); ++c) {
      const BodyConfig& cfg = z_next[mech.body_index(mech.contacts[c].body)];
      diag.min_phi = std::min(diag.min_phi,
                              signed_distance(mech.contacts[c], cfg));
    }
  }
  return diag;
}

Trajectory simulate(const Mechanism& mech, const SimState& initial,
                    const Controller& controller, int t_steps,
                    const SolverOptions& opts, bool warm_start) {
  if (t_steps < 1) throw std::invalid_argument("simulate: t_steps must be >= 1");
  Trajectory traj;
  traj.h = mech.timestep;
  traj.states.push_back(initial);
  SimState state = initial;
  StepResult prev;
  bool have_prev = false;
  for (int t = 0; t < t_steps; ++t) {
    std::vector<BodyInput> u =
        controller ? controller(t) : std::vector<BodyInput>(mech.bodies.size());
    StepResult r;
    try {
      r = step(mech, state, u, opts, (warm_start && have_prev) ? &prev : nullptr);
    } catch (const SimError& e) {
      throw SimError(std::string(e.what()) + " at step " + std::to_string(t),
                     t, e.status);
    }
    traj.diagnostics.push_back(
        step_diagnostics(mech, state.z_curr, r.z_next, r.solve.iterations));
    traj.impulses.push_back(r.contacts);
    traj.controls.push_back(std::move(u));
    state = advance(state, r);
    traj.states.push_back(state);
    prev = std::move(r);
    have_prev = true;
  }
  return traj;
}

SimState init_from_velocity(const Mechanism& mech,
                            const std::vector<BodyConfig>& configs,
                            const std::vector<Vec3>& linear_vels,
                            const std::vector<Vec3>& angular_vels) {
  const double h = mech.timestep;
  SimState state;
  state.z_curr = configs;
  state.z_prev.resize(configs.size());
  for (size_t i = 0; i < configs.size(); ++i) {
    state.z_prev[i].p = configs[i].p - h * linear_vels[i];
    const Vec3 half_step = 0.5 * h * angular_vels[i];
    if (half_step.squaredNorm() >= 1.0) {
      throw std::domain_error(
          "init_from_velocity: h*omega/2 outside the rotation chart");
    }
    state.z_prev[i].q =
        quat_mul(configs[i].q, phi_map(half_step).conjugate());
  }
  return state;
}

void write_trajectory_csv(const Trajectory& traj, const Mechanism& mech,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "step,time";
  for (size_t i = 0; i < mech.bodies.size(); ++i) {
    out << ",b" << i << "_px,b" << i << "_py,b" << i << "_pz,b" << i
        << "_qs,b" << i << "_qx,b" << i << "_qy,b" << i << "_qz";
  }
  for (size_t c = 0; c < mech.contacts.size(); ++c) {
    out << ",c" << c << "_gamma,c" << c << "_b1,c" << c << "_b2,c" << c
        << "_phi";
  }
  out << ",energy,lin_mom_x,lin_mom_y,lin_mom_z,ang_mom_x,ang_mom_y,ang_mom_z,"
         "min_phi,iterations\n";
  char buf[32];
  auto fmt = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  const size_t steps = traj.diagnostics.size();
  for (size_t t = 0; t < steps; ++t) {
    out << t << "," << fmt(static_cast<double>(t) * traj.h);
    const std::vector<BodyConfig>& z = traj.states[t + 1].z_curr;
    for (const BodyConfig& cfg : z) {
      out << "," << fmt(cfg.p.x()) << "," << fmt(cfg.p.y()) << ","
          << fmt(cfg.p.z()) << "," << fmt(cfg.q.s) << "," << fmt(cfg.q.v.x())
          << "," << fmt(cfg.q.v.y()) << "," << fmt(cfg.q.v.z());
    }
    for (const ContactVars& cv : traj.impulses[t]) {
      out << "," << fmt(cv.gamma) << "," << fmt(cv.b(0)) << "," << fmt(cv.b(1))
          << "," << fmt(cv.phi);
    }
    const StepDiagnostics& d = traj.diagnostics[t];
    out << "," << fmt(d.energy) << "," << fmt(d.linear_momentum.x()) << ","
        << fmt(d.linear_momentum.y()) << "," << fmt(d.linear_momentum.z())
        << "," << fmt(d.angular_momentum.x()) << ","
        << fmt(d.angular_momentum.y()) << "," << fmt(d.angular_momentum.z())
        << "," << fmt(d.min_phi) << "," << d.iterations << "\n";
  }
}

}  // namespace dojo
