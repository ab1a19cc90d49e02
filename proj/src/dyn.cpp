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

#include "dojo/dyn.hpp"

#include <cmath>
#include <stdexcept>

namespace dojo {

namespace {
double sqrt_chart(const Vec3& psi) {
  const double ss = psi.squaredNorm();
  if (ss >= 1.0) {
    throw std::domain_error("rotational residual: |psi| >= 1 (step too large)");
  }
  return std::sqrt(1.0 - ss);
}
}  // namespace

Vec3 linear_residual(const Body& body, const Vec3& p_prev, const Vec3& p,
                     const Vec3& p_next, const Vec3& g, double h,
                     const Vec3& mapped_impulse, const Vec3& f) {
  return body.m * (p_next - 2.0 * p + p_prev) / h - h * body.m * g -
         mapped_impulse - h * f;
}

Vec3 rot_momentum(const Mat3& J, const Vec3& psi) {
  return sqrt_chart(psi) * (J * psi) + psi.cross(J * psi);
}

Vec3 rot_momentum_conj(const Mat3& J, const Vec3& psi) {
  return sqrt_chart(psi) * (J * psi) - psi.cross(J * psi);
}

Mat3 rot_momentum_jacobian(const Mat3& J, const Vec3& psi) {
  const double s = sqrt_chart(psi);
  return s * J - (J * psi) * psi.transpose() / s + skew(psi) * J -
         skew(J * psi);
}

Mat3 rot_momentum_conj_jacobian(const Mat3& J, const Vec3& psi) {
  const double s = sqrt_chart(psi);
  return s * J - (J * psi) * psi.transpose() / s - skew(psi) * J +
         skew(J * psi);
}

Vec3 rotational_residual(const Body& body, const Vec3& psi, const Vec3& psi_next,
                         const Vec3& mapped_impulse, const Vec3& tau, double h) {
  return rot_momentum(body.J, psi_next) - rot_momentum_conj(body.J, psi) -
         mapped_impulse - 0.5 * h * h * tau;
}

UnitQuaternion recover_q_plus(const UnitQuaternion& q, const Vec3& psi_next) {
  return quat_mul(q, phi_map(psi_next));
}

Vec3 psi_from_configs(const UnitQuaternion& q, const UnitQuaternion& q_next) {
  const UnitQuaternion rel = quat_mul(q.conjugate(), q_next);
  if (rel.s <= 0.0) {
    throw std::domain_error(
        "psi_from_configs: relative rotation >= 180 deg (time step too large)");
  }
  return rel.v;
}

}  // namespace dojo
