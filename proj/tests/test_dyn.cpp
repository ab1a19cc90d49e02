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

#include "dojo/dyn.hpp"

using namespace dojo;

namespace {

std::mt19937_64 rng(99);

Vec3 random_vec3(double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

UnitQuaternion random_unit_quat() {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec4 q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return UnitQuaternion::from_vec4(q);
}

Body test_body() {
  Body b;
  b.m = 2.0;
  b.J << 0.05, 0.01, 0.0, 0.01, 0.08, -0.005, 0.0, -0.005, 0.03;
  return b;
}

}  // namespace

TEST_CASE("linear residual at rest and free fall") {
  const Body body = test_body();
  const Vec3 p(0.3, -0.2, 1.0);
  const double h = 0.01;

  CHECK(linear_residual(body, p, p, p, Vec3::Zero(), h, Vec3::Zero(),
                        Vec3::Zero())
            .norm() < 1e-15);

  // Free fall: residual zero iff p+ = 2p - p- + h^2 g.
  const Vec3 g(0.0, 0.0, -9.81);
  const Vec3 p_prev = p - Vec3(0.0, 0.0, 0.01);
  const Vec3 p_next = 2.0 * p - p_prev + h * h * g;
  CHECK(linear_residual(body, p_prev, p, p_next, g, h, Vec3::Zero(),
                        Vec3::Zero())
            .norm() < 1e-12);

  // Static contact: residual zero iff the normal impulse equals m g h.
  CHECK(linear_residual(body, p, p, p, g, h, Vec3(0, 0, body.m * 9.81 * h),
                        Vec3::Zero())
            .norm() < 1e-12);
}

TEST_CASE("linear residual is translation invariant") {
  const Body body = test_body();
  const double h = 0.05;
  const Vec3 shift = random_vec3(10.0);
  const Vec3 p_prev = random_vec3(), p = random_vec3(), p_next = random_vec3();
  const Vec3 imp = random_vec3(0.1), f = random_vec3(0.1);
  const Vec3 r0 =
      linear_residual(body, p_prev, p, p_next, Vec3::Zero(), h, imp, f);
  const Vec3 r1 = linear_residual(body, p_prev + shift, p + shift,
                                  p_next + shift, Vec3::Zero(), h, imp, f);
  CHECK((r0 - r1).norm() < 1e-11);
}

TEST_CASE("rotational residual zero cases") {
  const Body body = test_body();
  CHECK(rotational_residual(body, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                            Vec3::Zero(), 0.01)
            .norm() < 1e-15);

  // Torque-free with spherical inertia: psi+ = psi keeps the residual zero.
  Body sphere = body;
  sphere.J = 0.1 * Mat3::Identity();
  const Vec3 psi = 0.1 * random_vec3().normalized();
  CHECK(rotational_residual(sphere, psi, psi, Vec3::Zero(), Vec3::Zero(), 0.01)
            .norm() < 1e-14);
  // ...and any other psi+ of different magnitude breaks it (injectivity).
  CHECK(rotational_residual(sphere, psi, 1.5 * psi, Vec3::Zero(), Vec3::Zero(),
                            0.01)
            .norm() > 1e-6);
}

TEST_CASE("rotational residual rejects out-of-chart psi") {
  const Body body = test_body();
  CHECK_THROWS_AS(rotational_residual(body, Vec3(1.1, 0, 0), Vec3::Zero(),
                                      Vec3::Zero(), Vec3::Zero(), 0.01),
                  std::domain_error);
}

TEST_CASE("rotational residual jacobian wrt psi+ matches finite differences") {
  const Body body = test_body();
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 psi = 0.3 * random_vec3();
    const Vec3 psi_next = 0.3 * random_vec3();
    const Mat3 analytic = rot_momentum_jacobian(body.J, psi_next);
    Mat3 fd;
    const double eps = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vec3 dp = Vec3::Zero();
      dp(k) = eps;
      fd.col(k) = (rotational_residual(body, psi, psi_next + dp, Vec3::Zero(),
                                       Vec3::Zero(), 0.01) -
                   rotational_residual(body, psi, psi_next - dp, Vec3::Zero(),
                                       Vec3::Zero(), 0.01)) /
                  (2.0 * eps);
    }
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
  }
}

TEST_CASE("recover_q_plus and psi_from_configs invert each other") {
  const UnitQuaternion q = random_unit_quat();
  CHECK(recover_q_plus(q, Vec3::Zero()).vec4().isApprox(q.vec4(), 1e-14));

  const UnitQuaternion expect(0.8, Vec3(0.6, 0.0, 0.0));
  CHECK(recover_q_plus(UnitQuaternion::identity(), Vec3(0.6, 0.0, 0.0))
            .vec4()
            .isApprox(expect.vec4(), 1e-14));

  for (int trial = 0; trial < 50; ++trial) {
    const UnitQuaternion base = random_unit_quat();
    const Vec3 psi = 0.4 * random_vec3();
    const UnitQuaternion next = recover_q_plus(base, psi);
    CHECK((psi_from_configs(base, next) - psi).norm() < 1e-12);
  }

  CHECK((psi_from_configs(UnitQuaternion::identity(),
                          UnitQuaternion(0.8, Vec3(0.6, 0, 0))) -
         Vec3(0.6, 0.0, 0.0))
            .norm() < 1e-14);

  // 180 degree relative rotation sits on the chart boundary.
  CHECK_THROWS_AS(psi_from_configs(UnitQuaternion::identity(),
                                   UnitQuaternion(0.0, Vec3(1.0, 0.0, 0.0))),
                  std::domain_error);
}
