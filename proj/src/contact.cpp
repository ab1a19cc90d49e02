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

#include "dojo/contact.hpp"

#include <cmath>

namespace dojo {

Vec3 contact_point(const ContactSpec& spec, const BodyConfig& config) {
  return config.p + rotate(config.q, spec.offset);
}

double signed_distance(const ContactSpec& spec, const BodyConfig& config) {
  const Vec3 w = contact_point(spec, config);
  if (spec.surface == SurfaceKind::kHalfspace) {
    return spec.surface_normal.dot(w) - spec.surface_offset - spec.radius;
  }
  return (w - spec.sphere_center).norm() - spec.sphere_radius - spec.radius;
}

SurfaceFrame surface_frame(const ContactSpec& spec, const BodyConfig& config) {
  SurfaceFrame frame;
  if (spec.surface == SurfaceKind::kHalfspace) {
    frame.n = spec.surface_normal;
  } else {
    frame.n = (contact_point(spec, config) - spec.sphere_center).normalized();
  }
  Vec3 seed = std::abs(frame.n.dot(Vec3::UnitX())) > 0.9 ? Vec3::UnitY()
                                                         : Vec3::UnitX();
  frame.t1 = (seed - seed.dot(frame.n) * frame.n).normalized();
  frame.t2 = frame.n.cross(frame.t1);
  return frame;
}

Vec2 tangential_velocity(const ContactSpec& spec, const BodyConfig& config_z,
                         const BodyConfig& config_znext, double h,
                         const SurfaceFrame& frame) {
  const Vec3 vel =
      (contact_point(spec, config_znext) - contact_point(spec, config_z)) / h;
  return Vec2(frame.t1.dot(vel), frame.t2.dot(vel));
}

VecX soc_product(const VecX& a, const VecX& b) {
  VecX out(a.size());
  out(0) = a.dot(b);
  out.tail(a.size() - 1) =
      a(0) * b.tail(b.size() - 1) + b(0) * a.tail(a.size() - 1);
  return out;
}

VecX nonlinear_cone_residual(const Vec2& v, double gamma, const Vec3& beta,
                             const Vec3& eta, double c_f, double kappa) {
  VecX r(6);
  r.head<2>() = v - eta.tail<2>();
  r(2) = beta(0) - c_f * gamma;
  VecX e = VecX::Zero(3);
  e(0) = 1.0;
  r.tail<3>() = soc_product(beta, eta) - kappa * e;
  return r;
}

VecX linearized_cone_residual(const Vec2& v, double gamma, const Vec4& beta,
                              double psi_dual, const Vec4& eta, double c_f,
                              double kappa) {
  VecX r(9);
  r(0) = v(0) + psi_dual - eta(0);
  r(1) = v(1) + psi_dual - eta(1);
  r(2) = -v(0) + psi_dual - eta(2);
  r(3) = -v(1) + psi_dual - eta(3);
  r(4) = psi_dual * (c_f * gamma - beta.sum()) - kappa;
  r.tail<4>() = beta.cwiseProduct(eta) - kappa * Vec4::Ones();
  return r;
}

Vec2 friction_from_beta(ConeMode mode, const VecX& beta) {
  if (mode == ConeMode::kNonlinear) {
    return Vec2(beta(1), beta(2));
  }
  return Vec2(beta(0) - beta(2), beta(1) - beta(3));
}

}  // namespace dojo
