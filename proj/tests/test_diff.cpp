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

#include "dojo/diff.hpp"
#include "dojo/models.hpp"

using namespace dojo;

namespace {

std::mt19937_64 rng(271828);

Vec3 random_vec3(double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

// Gradient and oracle agree along random theta directions.
void check_gradients(const Mechanism& mech, const SimState& state,
                     const std::vector<BodyInput>& u, double kappa_grad,
                     int n_dirs, double tol) {
  SolverOptions opts;
  opts.kappa_grad_cache = kappa_grad;
  const RelaxedStep base = relaxed_step(mech, state, u, kappa_grad, opts);
  // Differentiate directly at the relaxed solution.
  const StepJacobians jac = implicit_step_gradients(
      *base.problem, base.solve, kappa_grad, opts);

  const ThetaLayout& th = base.problem->theta_layout();
  MatX full(6 * th.n_bodies, th.total);
  full.middleCols(th.zprev, 6 * th.n_bodies) = jac.d_zprev;
  full.middleCols(th.z, 6 * th.n_bodies) = jac.d_z;
  full.middleCols(th.u, 6 * th.n_bodies) = jac.d_u;
  full.rightCols(th.total - th.cf) = jac.d_params;

  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int d = 0; d < n_dirs; ++d) {
    VecX dir = VecX::Zero(th.total);
    // Random direction over states and inputs (h and params included in
    // dedicated tests below).
    for (int c = 0; c < th.cf; ++c) dir(c) = unif(rng);
    dir.normalize();
    const VecX fd =
        fd_step_oracle(mech, state, u, dir, 1e-5, kappa_grad, opts);
    const VecX an = full * dir;
    const double scale = std::max(1e-8, fd.cwiseAbs().maxCoeff());
    CHECK((an - fd).cwiseAbs().maxCoeff() / scale < tol);
  }
}

}  // namespace

TEST_CASE("free body: du is the analytic h^2/m map") {
  Body b;
  b.id = 0;
  b.m = 2.0;
  const double h = 0.01;
  Mechanism mech = build_mechanism({b}, {}, {}, Vec3(0, 0, -9.81), h);
  SimState state = init_from_velocity(mech, {BodyConfig{Vec3(0, 0, 1), {}}},
                                      {Vec3(0.3, 0.0, 0.1)},
                                      {Vec3(0.1, -0.2, 0.3)});
  SolverOptions opts;
  opts.kappa_grad_cache = kDefaultKappaGrad;
  std::vector<BodyInput> u(1);
  const StepResult r = step(mech, state, u, opts);
  const StepJacobians jac =
      implicit_step_gradients(*r.problem, r.solve, kDefaultKappaGrad, opts);

  // d p+ / d f = (h^2 / m) I.
  const MatX dpdf = jac.d_u.block<3, 3>(0, 0);
  CHECK((dpdf - (h * h / b.m) * Mat3::Identity()).cwiseAbs().maxCoeff() <
        1e-8);
  // d p+ / d tau = 0 for a free body.
  CHECK(jac.d_u.block<3, 3>(0, 3).cwiseAbs().maxCoeff() < 1e-10);
  // d p+ / d z: p+ = 2p - p- + ...: identity structure.
  CHECK((jac.d_z.block<3, 3>(0, 0) - 2.0 * Mat3::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-8);
  CHECK((jac.d_zprev.block<3, 3>(0, 0) + Mat3::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-8);
}

TEST_CASE("free body gradients match the oracle") {
  Body b;
  b.id = 0;
  Mechanism mech = build_mechanism({b}, {}, {}, Vec3(0, 0, -9.81), 0.01);
  for (int trial = 0; trial < 3; ++trial) {
    SimState state = init_from_velocity(
        mech, {BodyConfig{Vec3(0, 0, 0.5) + 0.2 * random_vec3(),
                          phi_map(0.3 * random_vec3())}},
        {random_vec3(0.5)}, {random_vec3(0.5)});
    std::vector<BodyInput> u(1);
    u[0].f = random_vec3(0.2);
    u[0].tau = random_vec3(0.05);
    check_gradients(mech, state, u, 1e-3, 3, 1e-6);
  }
}

TEST_CASE("one-contact box gradients match the oracle at several kappa") {
  models::BoxParams params;
  params.vertices = {Vec3(0.0, 0.0, -0.25)};
  Mechanism mech = models::make_box(params);
  for (double kappa : {1e-2, 1e-3, 3e-4}) {
    for (int trial = 0; trial < 3; ++trial) {
      SimState state = init_from_velocity(
          mech,
          {BodyConfig{Vec3(0.0, 0.0, 0.251 + 0.05 * std::abs(random_vec3()(0))),
                      phi_map(0.1 * random_vec3())}},
          {random_vec3(0.3)}, {random_vec3(0.3)});
      std::vector<BodyInput> u(1);
      u[0].f = random_vec3(0.3);
      check_gradients(mech, state, u, kappa, 2, 1e-3);
    }
  }
}

TEST_CASE("chain-with-contacts gradients match the oracle") {
  models::ChainParams params;
  params.links = 3;
  params.gravity = Vec3(0.0, 0.0, -9.81);
  params.contacts_on_end_links = 2;
  Mechanism mech = models::make_chain(params);
  std::vector<BodyConfig> configs = models::chain_rest_configs(params, 0.05);
  std::vector<Vec3> v(3), w(3);
  for (int i = 0; i < 3; ++i) {
    v[i] = random_vec3(0.2);
    w[i] = random_vec3(0.2);
  }
  SimState state = init_from_velocity(mech, configs, v, w);
  std::vector<BodyInput> u(3);
  u[1].f = random_vec3(0.1);
  check_gradients(mech, state, u, 1e-3, 3, 1e-3);
}

TEST_CASE("parameter gradients: friction, offsets, mass, timestep") {
  models::BoxParams params;
  Mechanism mech = models::make_box(params);
  SimState state = init_from_velocity(
      mech, {BodyConfig{Vec3(0, 0, params.half_extent + 0.001), {}}},
      {Vec3(1.0, 0.2, 0.0)}, {Vec3::Zero()});
  std::vector<BodyInput> u(1);
  SolverOptions opts;
  const double kappa = 1e-3;

  const RelaxedStep base = relaxed_step(mech, state, u, kappa, opts);
  const StepJacobians jac =
      implicit_step_gradients(*base.problem, base.solve, kappa, opts);
  const ThetaLayout& th = base.problem->theta_layout();

  MatX full = MatX::Zero(6 * th.n_bodies, th.total);
  full.rightCols(th.total - th.cf) = jac.d_params;

  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    VecX dir = VecX::Zero(th.total);
    for (int c = th.cf; c < th.total; ++c) dir(c) = unif(rng);
    dir.normalize();
    const VecX fd = fd_step_oracle(mech, state, u, dir, 1e-6, kappa, opts);
    const VecX an = full * dir;
    const double scale = std::max(1e-8, fd.cwiseAbs().maxCoeff());
    CHECK((an - fd).cwiseAbs().maxCoeff() / scale < 1e-3);
  }
}

TEST_CASE("full solution sensitivity matches finite differences") {
  // All components of w, not just the next configuration.
  models::BoxParams params;
  params.vertices = {Vec3(0.0, 0.0, -0.25)};
  Mechanism mech = models::make_box(params);
  SimState state = init_from_velocity(
      mech, {BodyConfig{Vec3(0.02, -0.01, 0.27), phi_map(Vec3(0.05, 0, 0))}},
      {Vec3(0.4, 0.1, -0.1)}, {Vec3(0.2, 0.0, 0.3)});
  std::vector<BodyInput> u(1);
  u[0].f = Vec3(0.1, 0.0, 0.2);
  const double kappa = 2e-6;  // kappa_tol / 5 floor
  SolverOptions opts;

  const RelaxedStep base = relaxed_step(mech, state, u, kappa, opts);
  const MatX sens = implicit_sensitivity(*base.problem, base.solve, kappa, opts);
  const ThetaLayout th = base.problem->theta_layout();
  const ABlockLayout& layout = base.problem->a_layout();

  auto tangent_diff = [&](const SolverPoint& plus, const SolverPoint& minus,
                          double scale) {
    VecX out(base.problem->tangent_dim());
    for (const ABlock& blk : layout.blocks) {
      if (blk.is_quaternion) {
        const UnitQuaternion qp =
            UnitQuaternion::from_vec4(plus.a.segment<4>(blk.value_offset));
        const UnitQuaternion qm =
            UnitQuaternion::from_vec4(minus.a.segment<4>(blk.value_offset));
        out.segment<3>(blk.tangent_offset) =
            quat_mul(qm.conjugate(), qp).v / scale;
      } else {
        out.segment(blk.tangent_offset, blk.size) =
            (plus.a.segment(blk.value_offset, blk.size) -
             minus.a.segment(blk.value_offset, blk.size)) /
            scale;
      }
    }
    const int nt = layout.tangent_dim;
    const int nk = base.problem->cones().total();
    out.segment(nt, nk) = (plus.b - minus.b) / scale;
    out.segment(nt + nk, nk) = (plus.c - minus.c) / scale;
    return out;
  };

  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double delta = 1e-5;
  for (int d = 0; d < 10; ++d) {
    VecX dir = VecX::Zero(th.total);
    for (int c = 0; c < th.total; ++c) dir(c) = unif(rng);
    dir.normalize();
    auto eval = [&](double sign) {
      Mechanism m = mech;
      SimState s = state;
      std::vector<BodyInput> uu = u;
      apply_theta_perturbation(th, dir, sign * delta, &m, &s, &uu);
      return relaxed_step(m, s, uu, kappa, opts).solve.w;
    };
    const VecX fd = tangent_diff(eval(1.0), eval(-1.0), 2.0 * delta);
    const VecX an = sens * dir;
    const double scale = std::max(1e-8, fd.cwiseAbs().maxCoeff());
    CHECK((an - fd).cwiseAbs().maxCoeff() / scale < 1e-3);
  }
}

TEST_CASE("zero direction gives zero derivative") {
  Body b;
  b.id = 0;
  Mechanism mech = build_mechanism({b}, {}, {}, Vec3::Zero(), 0.01);
  SimState state;
  state.z_curr.resize(1);
  state.z_prev = state.z_curr;
  const ThetaLayout th = ThetaLayout::make(1, 0);
  SolverOptions opts;
  const VecX fd = fd_step_oracle(mech, state, {}, VecX::Zero(th.total), 1e-5,
                                 1e-3, opts);
  CHECK(fd.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient smoothness increases with kappa near contact activation") {
  // Resting box, growing vertical force: the lift-off transition in
  // d(height)/d f_z is sharper for smaller kappa.
  models::BoxParams params;
  params.timestep = 0.1;
  Mechanism mech = models::make_box(params);
  SimState state;
  state.z_curr = {BodyConfig{Vec3(0, 0, params.half_extent), {}}};
  state.z_prev = state.z_curr;
  SolverOptions opts;

  const double mg = params.mass * 9.81;
  auto gradient_curve = [&](double kappa) {
    std::vector<double> grads;
    for (double f = 0.0; f <= 2.0 * mg; f += mg / 8.0) {
      std::vector<BodyInput> u(1);
      u[0].f = Vec3(0.0, 0.0, f);
      const RelaxedStep rs = relaxed_step(mech, state, u, kappa, opts);
      const StepJacobians jac =
          implicit_step_gradients(*rs.problem, rs.solve, kappa, opts);
      grads.push_back(jac.d_u(2, 2));  // d z-height / d f_z
    }
    return grads;
  };

  const auto soft = gradient_curve(1e-2);
  const auto hard = gradient_curve(3e-4);
  const double free_value =
      params.timestep * params.timestep / params.mass;
  // Below lift-off the hard-contact gradient is pinned near zero (it scales
  // with kappa) while the soft one already responds.
  CHECK(hard.front() < 0.05 * free_value);
  CHECK(hard.front() < 0.2 * soft.front());
  // Total variation grows as kappa decreases (sharper transition).
  auto tv = [](const std::vector<double>& g) {
    double s = 0.0;
    for (size_t i = 1; i < g.size(); ++i) s += std::abs(g[i] - g[i - 1]);
    return s;
  };
  CHECK(tv(hard) >= tv(soft));
  // Both curves rise toward the free-body value h^2/m past lift-off.
  CHECK(hard.back() == doctest::Approx(free_value).epsilon(0.05));
}
