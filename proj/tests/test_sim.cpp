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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dojo/models.hpp"
#include "dojo/sim.hpp"

using namespace dojo;

namespace {

SolverOptions tight_opts() {
  SolverOptions opts;
  opts.r_tol = 1e-10;
  opts.kappa_tol = 1e-8;
  return opts;
}

}  // namespace

TEST_CASE("free body step matches the analytic free-fall map") {
  Body b;
  b.id = 0;
  b.m = 1.3;
  const double h = 0.01;
  const Vec3 g(0.0, 0.0, -9.81);
  Mechanism mech = build_mechanism({b}, {}, {}, g, h);

  SimState state = init_from_velocity(mech, {BodyConfig{Vec3(0, 0, 1), {}}},
                                      {Vec3(0.4, -0.1, 0.2)},
                                      {Vec3(0.3, 0.1, -0.2)});
  SolverOptions opts = tight_opts();
  const StepResult r = step(mech, state, {}, opts);
  const Vec3 expected =
      2.0 * state.z_curr[0].p - state.z_prev[0].p + h * h * g;
  CHECK((r.z_next[0].p - expected).norm() < 1e-10);
}

TEST_CASE("resting box stays put with phi in [0, 1e-6]") {
  models::BoxParams params;
  Mechanism mech = models::make_box(params);
  SimState state;
  state.z_curr = {BodyConfig{Vec3(0, 0, params.half_extent), {}}};
  state.z_prev = state.z_curr;

  SolverOptions opts = tight_opts();
  Trajectory traj = simulate(mech, state, nullptr, 40, opts);
  const SimState& last = traj.states.back();
  CHECK((last.z_curr[0].p - state.z_curr[0].p).norm() < 1e-5);
  // After settling, consecutive configurations coincide tightly.
  const auto& prev = traj.states[traj.states.size() - 2];
  CHECK((last.z_curr[0].p - prev.z_curr[0].p).norm() < 1e-8);
  CHECK(traj.diagnostics.back().min_phi >= 0.0);
  CHECK(traj.diagnostics.back().min_phi <= 1e-6);
}

TEST_CASE("frictionless slide preserves tangential velocity") {
  models::BoxParams params;
  params.friction = 0.0;
  Mechanism mech = models::make_box(params);
  // Frictionless nonlinear cones pin beta_1 = 0, putting beta on the cone
  // boundary; the solver still converges to kappa-level accuracy.
  SimState state = init_from_velocity(
      mech, {BodyConfig{Vec3(0, 0, params.half_extent), {}}},
      {Vec3(1.0, 0.0, 0.0)}, {Vec3::Zero()});
  SolverOptions opts;
  Trajectory traj = simulate(mech, state, nullptr, 20, opts);
  const SimState& last = traj.states.back();
  const Vec3 v =
      (last.z_curr[0].p - last.z_prev[0].p) / mech.timestep;
  CHECK(std::abs(v.x() - 1.0) < 1e-4);
  CHECK(std::abs(v.y()) < 1e-6);
}

TEST_CASE("momentum is conserved for a coasting chain of any joint type") {
  // The joint impulse pairings differ per constraint type; conservation must
  // hold for each of them.
  for (JointKind kind : {JointKind::kSpherical, JointKind::kRevolute,
                         JointKind::kFixed}) {
    models::ChainParams params;
    params.links = 3;
    params.gravity = Vec3::Zero();
    params.timestep = 0.01;
    params.joint = kind;
    Mechanism mech = models::make_chain(params);
    std::vector<BodyConfig> configs = models::chain_rest_configs(params);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 0.05);
    Controller controller = [&](int t) {
      std::vector<BodyInput> inputs(3);
      if (t < 30) {
        for (auto& in : inputs) {
          in.f = Vec3(u(rng), u(rng), u(rng));
          in.tau = Vec3(u(rng), u(rng), u(rng));
        }
      }
      return inputs;
    };

    SolverOptions opts;
    opts.r_tol = 1e-12;
    SimState state{configs, configs};
    Trajectory traj = simulate(mech, state, controller, 130, opts);

    // Compare momentum over the coast (after actuation stops).
    const StepDiagnostics& first = traj.diagnostics[31];
    const StepDiagnostics& last = traj.diagnostics.back();
    const double lin_scale = first.linear_momentum.norm();
    const double ang_scale = first.angular_momentum.norm();
    REQUIRE(lin_scale > 1e-4);
    REQUIRE(ang_scale > 1e-4);
    // Drift is solver-tolerance noise accumulated over ~1000 steps.
    CHECK((last.linear_momentum - first.linear_momentum).norm() / lin_scale <
          1e-9);
    CHECK((last.angular_momentum - first.angular_momentum).norm() / ang_scale <
          1e-9);
  }
}

TEST_CASE("world-joint pendulum: constraint held, energy bounded") {
  Body bob;
  bob.id = 0;
  bob.m = 1.0;
  bob.J = 0.01 * Mat3::Identity();
  Joint pivot;
  pivot.id = 0;
  pivot.kind = JointKind::kSpherical;
  pivot.parent = kWorldId;
  pivot.child = 0;
  pivot.parent_anchor = Vec3::Zero();       // world origin
  pivot.child_anchor = Vec3(0.0, 0.0, 0.5);  // rod of length 0.5 above the bob
  Mechanism mech =
      build_mechanism({bob}, {pivot}, {}, Vec3(0, 0, -9.81), 0.01);
  REQUIRE(mech.is_tree);

  // Released horizontally: bob at (0.5, 0, 0) with the rod along -x.
  BodyConfig start;
  start.q = phi_map(Vec3(0.0, std::sin(M_PI / 4), 0.0));  // 90 deg about y
  start.p = -rotate(start.q, pivot.child_anchor);
  SimState state{{start}, {start}};
  SolverOptions opts;
  opts.r_tol = 1e-11;
  Trajectory traj = simulate(mech, state, nullptr, 300, opts);

  double min_e = 1e300, max_e = -1e300, max_anchor_err = 0.0;
  for (size_t t = 0; t < traj.diagnostics.size(); ++t) {
    const BodyConfig& cfg = traj.states[t + 1].z_curr[0];
    max_anchor_err = std::max(
        max_anchor_err, (cfg.p + rotate(cfg.q, pivot.child_anchor)).norm());
    min_e = std::min(min_e, traj.diagnostics[t].energy);
    max_e = std::max(max_e, traj.diagnostics[t].energy);
  }
  CHECK(max_anchor_err < 1e-9);
  // The bob actually swings through the bottom...
  double min_z = 0.0;
  for (const auto& s : traj.states) min_z = std::min(min_z, s.z_curr[0].p.z());
  CHECK(min_z < -0.45);
  // ...with bounded energy oscillation (no secular drift).
  CHECK(max_e - min_e < 0.05 * 9.81 * 0.5);
}

TEST_CASE("sliding friction maximally dissipates") {
  // Whenever a contact slides, the friction impulse sits on the cone
  // boundary (|b| >= (1-1e-4) c_f gamma) antiparallel to the slip velocity.
  models::BoxParams params;
  Mechanism mech = models::make_box(params);
  SimState state = init_from_velocity(
      mech, {BodyConfig{Vec3(0, 0, params.half_extent), {}}},
      {Vec3(0.8, 0.5, 0.0)}, {Vec3::Zero()});
  SolverOptions opts;
  opts.r_tol = 1e-10;
  opts.kappa_tol = 1e-9;
  Trajectory traj = simulate(mech, state, nullptr, 40, opts);
  int sliding_samples = 0;
  for (size_t t = 0; t < traj.diagnostics.size(); ++t) {
    const auto& z = traj.states[t].z_curr[0];
    const auto& zn = traj.states[t + 1].z_curr[0];
    for (size_t c = 0; c < mech.contacts.size(); ++c) {
      const SurfaceFrame frame = surface_frame(mech.contacts[c], z);
      const Vec2 v =
          tangential_velocity(mech.contacts[c], z, zn, mech.timestep, frame);
      const ContactVars& cv = traj.impulses[t][c];
      if (v.norm() > 1e-4 && cv.gamma > 1e-8) {
        ++sliding_samples;
        const double cosang =
            std::clamp(-cv.b.dot(v) / (cv.b.norm() * v.norm()), -1.0, 1.0);
        CHECK(std::acos(cosang) < 1e-3);
        CHECK(cv.b.norm() >=
              (1.0 - 1e-4) * mech.contacts[c].friction * cv.gamma);
      }
    }
  }
  CHECK(sliding_samples > 50);
}

TEST_CASE("loops in the mechanism graph use the dense solve") {
  // Three bodies joined in a triangle: not a tree; the step still works.
  std::vector<Body> bodies(3);
  Mat3 J = 0.01 * Mat3::Identity();
  for (int i = 0; i < 3; ++i) {
    bodies[i].id = i;
    bodies[i].J = J;
  }
  auto make_joint = [](int id, int a, int b, const Vec3& pa, const Vec3& pb) {
    Joint j;
    j.id = id;
    j.kind = JointKind::kSpherical;
    j.parent = a;
    j.child = b;
    j.parent_anchor = pa;
    j.child_anchor = pb;
    return j;
  };
  // Equilateral triangle of side 1 with anchors at the corners.
  const Vec3 c0(0.0, 0.0, 0.0), c1(1.0, 0.0, 0.0), c2(0.5, 0.866025403784, 0.0);
  std::vector<BodyConfig> configs(3);
  configs[0].p = 0.5 * (c0 + c1);
  configs[1].p = 0.5 * (c1 + c2);
  configs[2].p = 0.5 * (c2 + c0);
  std::vector<Joint> joints = {
      make_joint(0, 0, 1, c1 - configs[0].p, c1 - configs[1].p),
      make_joint(1, 1, 2, c2 - configs[1].p, c2 - configs[2].p),
      make_joint(2, 2, 0, c0 - configs[2].p, c0 - configs[0].p),
  };
  Mechanism mech = build_mechanism(bodies, joints, {}, Vec3::Zero(), 0.01);
  CHECK(!mech.is_tree);

  SimState state{configs, configs};
  std::vector<BodyInput> u(3);
  u[0].f = Vec3(0.01, 0.02, 0.03);
  SolverOptions opts;
  opts.r_tol = 1e-10;
  const StepResult r = step(mech, state, u, opts);
  CHECK(r.solve.status == SolveStatus::kConverged);
  // Joint constraints hold at the next configuration.
  for (const Joint& j : mech.joints) {
    const VecX k = joint_residual(j, r.z_next[mech.body_index(j.parent)],
                                  r.z_next[mech.body_index(j.child)]);
    CHECK(k.norm() < 1e-8);
  }
}

TEST_CASE("ball resting on a static sphere") {
  Body ball;
  ball.id = 0;
  ball.m = 0.5;
  ball.J = 0.002 * Mat3::Identity();
  ContactSpec c;
  c.id = 0;
  c.body = 0;
  c.offset = Vec3::Zero();
  c.radius = 0.1;
  c.friction = 0.5;
  c.surface = SurfaceKind::kSphere;
  c.sphere_center = Vec3(0.0, 0.0, -1.0);
  c.sphere_radius = 1.0;
  Mechanism mech = build_mechanism({ball}, {}, {c}, Vec3(0, 0, -9.81), 0.01);

  SimState state;
  state.z_curr = {BodyConfig{Vec3(0.0, 0.0, 0.1), {}}};  // apex tangency
  state.z_prev = state.z_curr;
  SolverOptions opts;
  opts.r_tol = 1e-10;
  opts.kappa_tol = 1e-8;
  Trajectory traj = simulate(mech, state, nullptr, 20, opts);
  for (const auto& d : traj.diagnostics) {
    CHECK(d.min_phi >= -1e-8);
    CHECK(d.min_phi <= 1e-5);
  }
  // The apex equilibrium is preserved by symmetry.
  CHECK((traj.states.back().z_curr[0].p - state.z_curr[0].p).norm() < 1e-5);
}

TEST_CASE("init_from_velocity round trip") {
  Body b;
  b.id = 0;
  Mechanism mech = build_mechanism({b}, {}, {}, Vec3::Zero(), 0.1);
  const Vec3 v(1.0, 0.0, 0.0);
  const Vec3 omega(0.2, -0.4, 1.0);
  BodyConfig cfg;
  cfg.p = Vec3(1.0, 2.0, 3.0);
  cfg.q = phi_map(Vec3(0.1, 0.2, 0.3));
  SimState s = init_from_velocity(mech, {cfg}, {v}, {omega});

  CHECK((s.z_prev[0].p - (cfg.p - 0.1 * v)).norm() < 1e-14);
  // zero velocity: z_prev == z_curr
  SimState s0 = init_from_velocity(mech, {cfg}, {Vec3::Zero()}, {Vec3::Zero()});
  CHECK((s0.z_prev[0].p - cfg.p).norm() == 0.0);
  CHECK((s0.z_prev[0].q.vec4() - cfg.q.vec4()).norm() < 1e-15);

  const Vec3 psi = psi_from_configs(s.z_prev[0].q, s.z_curr[0].q);
  CHECK((2.0 / mech.timestep * psi - omega).norm() < 1e-9);

  CHECK_THROWS_AS(
      init_from_velocity(mech, {cfg}, {v}, {Vec3(30.0, 0.0, 0.0)}),
      std::domain_error);
}

TEST_CASE("warm starting does not change the converged trajectory") {
  models::BoxParams params;
  Mechanism mech = models::make_box(params);
  SimState state = init_from_velocity(
      mech, {BodyConfig{Vec3(0, 0, params.half_extent + 0.05), {}}},
      {Vec3(0.5, 0.2, 0.0)}, {Vec3(0.0, 0.0, 1.0)});
  SolverOptions opts;
  Trajectory warm = simulate(mech, state, nullptr, 25, opts, true);
  Trajectory cold = simulate(mech, state, nullptr, 25, opts, false);
  for (size_t t = 0; t < warm.states.size(); ++t) {
    for (size_t i = 0; i < warm.states[t].z_curr.size(); ++i) {
      CHECK((warm.states[t].z_curr[i].p - cold.states[t].z_curr[i].p).norm() <
            1e-8);
      CHECK((warm.states[t].z_curr[i].q.vec4() -
             cold.states[t].z_curr[i].q.vec4())
                .norm() < 1e-8);
    }
  }
}

TEST_CASE("determinism: identical runs produce identical trajectories") {
  models::BoxParams params;
  Mechanism mech = models::make_box(params);
  SimState state = init_from_velocity(
      mech, {BodyConfig{Vec3(0, 0, 0.5), {}}}, {Vec3(1.0, -0.3, 0.0)},
      {Vec3(0.2, 0.0, 2.0)});
  SolverOptions opts;
  Trajectory a = simulate(mech, state, nullptr, 30, opts);
  Trajectory b = simulate(mech, state, nullptr, 30, opts);
  for (size_t t = 0; t < a.states.size(); ++t) {
    CHECK((a.states[t].z_curr[0].p - b.states[t].z_curr[0].p).norm() == 0.0);
    CHECK((a.states[t].z_curr[0].q.vec4() - b.states[t].z_curr[0].q.vec4())
              .norm() == 0.0);
  }
}

TEST_CASE("solver failure surfaces as SimError with the step index") {
  models::BoxParams params;
  Mechanism mech = models::make_box(params);
  SimState state;
  state.z_curr = {BodyConfig{Vec3(0, 0, 1.0), {}}};
  state.z_prev = state.z_curr;
  SolverOptions opts;
  opts.max_iterations = 1;
  CHECK_THROWS_AS(simulate(mech, state, nullptr, 3, opts), SimError);
}
