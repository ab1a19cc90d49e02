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

// Contact constraint residuals: signed distance, tangential velocity, and
// the relaxed optimality conditions of the nonlinear second-order friction
// cone and its 4-vertex linearized alternative.

#ifndef DOJO_CONTACT_HPP_
#define DOJO_CONTACT_HPP_

#include "dojo/mech.hpp"
#include "dojo/quat.hpp"

namespace dojo {

// Right-handed orthonormal contact frame {t1, t2, n}.
struct SurfaceFrame {
  Vec3 n = Vec3::UnitZ();
  Vec3 t1 = Vec3::UnitX();
  Vec3 t2 = Vec3::UnitY();
};

struct ContactVars {
  double gamma = 0.0;  // normal impulse magnitude, N s
  VecX beta;           // friction cone variable (3 nonlinear, 4 linearized)
  VecX eta;            // dual (3 nonlinear, 4 linearized)
  double psi_dual = 0.0;  // linearized mode only
  Vec2 b = Vec2::Zero();  // recovered friction impulse in (t1, t2)
  double phi = 0.0;       // signed distance at the accepted next state
};

// World position of the contact point for a body configuration.
Vec3 contact_point(const ContactSpec& spec, const BodyConfig& config);

// Gap to the environment surface; positive above, negative penetrating.
double signed_distance(const ContactSpec& spec, const BodyConfig& config);

// Deterministic tangent basis: Gram-Schmidt of the world x-axis against the
// surface normal (y-axis fallback when they are nearly parallel).
SurfaceFrame surface_frame(const ContactSpec& spec, const BodyConfig& config);

// Finite-difference velocity of the contact point projected on (t1, t2).
Vec2 tangential_velocity(const ContactSpec& spec, const BodyConfig& config_z,
                         const BodyConfig& config_znext, double h,
                         const SurfaceFrame& frame);

// Second-order-cone product (aᵀb, a1 b_(2:n) + b1 a_(2:n)).
VecX soc_product(const VecX& a, const VecX& b);

// Relaxed optimality conditions of the maximal-dissipation cone program:
// stacked (v - eta_(2:3), beta_1 - c_f gamma, beta∘eta - kappa e).
VecX nonlinear_cone_residual(const Vec2& v, double gamma, const Vec3& beta,
                             const Vec3& eta, double c_f, double kappa);

// Relaxed LCP-style conditions for the 4-vertex cone: stacked
// ([v;-v] + psi 1 - eta, psi (c_f gamma - betaᵀ1) - kappa, beta∘eta - kappa 1).
VecX linearized_cone_residual(const Vec2& v, double gamma, const Vec4& beta,
                              double psi_dual, const Vec4& eta, double c_f,
                              double kappa);

// Friction impulse in the tangent plane recovered from the cone variable.
Vec2 friction_from_beta(ConeMode mode, const VecX& beta);

}  // namespace dojo

#endif  // DOJO_CONTACT_HPP_
