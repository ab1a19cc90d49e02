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

// Variational integrator residuals for a single rigid body. Both residuals
// are discrete impulse balances over one step: the linear one in N s, the
// rotational one scaled by h/2 in the body tangent space.

#ifndef DOJO_DYN_HPP_
#define DOJO_DYN_HPP_

#include "dojo/mech.hpp"
#include "dojo/quat.hpp"

namespace dojo {

struct BodyInput {
  Vec3 f = Vec3::Zero();    // world frame, N
  Vec3 tau = Vec3::Zero();  // body frame, N m
};

// m (p+ - 2p + p-)/h - h m g - mapped_impulse - h f
Vec3 linear_residual(const Body& body, const Vec3& p_prev, const Vec3& p,
                     const Vec3& p_next, const Vec3& g, double h,
                     const Vec3& mapped_impulse, const Vec3& f);

// sqrt(1-psi+ᵀpsi+) J psi+ + psi+ x J psi+
//   - sqrt(1-psiᵀpsi) J psi + psi x J psi - mapped_impulse - h² tau / 2
Vec3 rotational_residual(const Body& body, const Vec3& psi, const Vec3& psi_next,
                         const Vec3& mapped_impulse, const Vec3& tau, double h);

// f(x) = sqrt(1-xᵀx) J x + x cross J x, and its Jacobian. The rotational
// residual is rot_momentum(psi+) - rot_momentum_conj(psi) - ...
Vec3 rot_momentum(const Mat3& J, const Vec3& psi);
Vec3 rot_momentum_conj(const Mat3& J, const Vec3& psi);
Mat3 rot_momentum_jacobian(const Mat3& J, const Vec3& psi);
Mat3 rot_momentum_conj_jacobian(const Mat3& J, const Vec3& psi);

// q+ = q ⊗ (sqrt(1-psi+ᵀpsi+), psi+)
UnitQuaternion recover_q_plus(const UnitQuaternion& q, const Vec3& psi_next);

// Inverse of recover_q_plus; errors when the relative rotation reaches 180°.
Vec3 psi_from_configs(const UnitQuaternion& q, const UnitQuaternion& q_next);

}  // namespace dojo

#endif  // DOJO_DYN_HPP_
