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

// Unit-quaternion algebra and the tangent-space maps used by the solver's
// non-Euclidean updates. Quaternions are scalar-first, q = (s, v1, v2, v3),
// and map body-frame vectors into the world frame.

#ifndef DOJO_QUAT_HPP_
#define DOJO_QUAT_HPP_

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace dojo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using MatX = Eigen::MatrixXd;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat43 = Eigen::Matrix<double, 4, 3>;

struct UnitQuaternion {
  double s = 1.0;   // scalar part
  Vec3 v = Vec3::Zero();

  UnitQuaternion() = default;
  UnitQuaternion(double scalar, const Vec3& vector) : s(scalar), v(vector) {}
  UnitQuaternion(double w, double x, double y, double z) : s(w), v(x, y, z) {}

  static UnitQuaternion identity() { return {1.0, Vec3::Zero()}; }

  Vec4 vec4() const { return Vec4(s, v.x(), v.y(), v.z()); }
  static UnitQuaternion from_vec4(const Vec4& q) {
    return {q(0), Vec3(q(1), q(2), q(3))};
  }

  double norm() const { return std::sqrt(s * s + v.squaredNorm()); }

  UnitQuaternion conjugate() const { return {s, -v}; }

  UnitQuaternion normalized() const {
    const double n = norm();
    return {s / n, v / n};
  }
};

inline Mat3 skew(const Vec3& x) {
  Mat3 m;
  m << 0.0, -x.z(), x.y(),
       x.z(), 0.0, -x.x(),
      -x.y(), x.x(), 0.0;
  return m;
}

// Left-multiplication matrix: lmat(qa) * qb == qa ⊗ qb as 4-vectors.
inline Mat4 lmat(const UnitQuaternion& q) {
  Mat4 m;
  m(0, 0) = q.s;
  m.block<1, 3>(0, 1) = -q.v.transpose();
  m.block<3, 1>(1, 0) = q.v;
  m.block<3, 3>(1, 1) = q.s * Mat3::Identity() + skew(q.v);
  return m;
}

// Right-multiplication matrix: rmat(qb) * qa == qa ⊗ qb as 4-vectors.
inline Mat4 rmat(const UnitQuaternion& q) {
  Mat4 m;
  m(0, 0) = q.s;
  m.block<1, 3>(0, 1) = -q.v.transpose();
  m.block<3, 1>(1, 0) = q.v;
  m.block<3, 3>(1, 1) = q.s * Mat3::Identity() - skew(q.v);
  return m;
}

// Extracts the vector part: vmat() * q.vec4() == q.v.
inline Mat34 vmat() {
  Mat34 m = Mat34::Zero();
  m.block<3, 3>(0, 1) = Mat3::Identity();
  return m;
}

// Conjugation matrix: tmat() * q.vec4() == q.conjugate().vec4().
inline Mat4 tmat() {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(1, 1) = -Mat3::Identity();
  return m;
}

// Fixed tangent basis [0; I3]; attitude_jacobian(q) == lmat(q) * hmat().
inline Mat43 hmat() {
  Mat43 m = Mat43::Zero();
  m.block<3, 3>(1, 0) = Mat3::Identity();
  return m;
}

inline UnitQuaternion quat_mul(const UnitQuaternion& qa,
                               const UnitQuaternion& qb) {
  constexpr double kUnitTol = 1e-9;
  if (std::abs(qa.norm() - 1.0) > kUnitTol ||
      std::abs(qb.norm() - 1.0) > kUnitTol) {
    throw std::invalid_argument("quat_mul: input quaternion is not unit");
  }
  UnitQuaternion out(qa.s * qb.s - qa.v.dot(qb.v),
                     qa.s * qb.v + qb.s * qa.v + qa.v.cross(qb.v));
  return out.normalized();
}

// Tangent-space basis at q: columns orthonormal and orthogonal to q.
inline Mat43 attitude_jacobian(const UnitQuaternion& q) {
  Mat43 g;
  g.block<1, 3>(0, 0) = -q.v.transpose();
  g.block<3, 3>(1, 0) = q.s * Mat3::Identity() + skew(q.v);
  return g;
}

// Maps a tangent step d (‖d‖ < 1) to the unit quaternion (sqrt(1-dᵀd), d).
inline UnitQuaternion phi_map(const Vec3& d) {
  const double dd = d.squaredNorm();
  if (dd >= 1.0) {
    throw std::domain_error("phi_map: argument has squared norm >= 1");
  }
  return {std::sqrt(1.0 - dd), d};
}

// Rotates a body-frame vector into the world frame.
inline Vec3 rotate(const UnitQuaternion& q, const Vec3& x) {
  return x + 2.0 * (q.s * q.v.cross(x) + q.v.cross(q.v.cross(x)));
}

inline Mat3 rotation_matrix(const UnitQuaternion& q) {
  return (q.s * q.s - q.v.squaredNorm()) * Mat3::Identity() +
         2.0 * q.v * q.v.transpose() + 2.0 * q.s * skew(q.v);
}

}  // namespace dojo

#endif  // DOJO_QUAT_HPP_
