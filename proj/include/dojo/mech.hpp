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

// Maximal-coordinates mechanism description: bodies, joints, contacts, and
// the body/joint/contact graph used for structured linear solves.

#ifndef DOJO_MECH_HPP_
#define DOJO_MECH_HPP_

#include <string>
#include <vector>

#include "dojo/quat.hpp"

namespace dojo {

inline constexpr int kWorldId = -1;

struct Body {
  int id = 0;
  double m = 1.0;       // kg
  Mat3 J = Mat3::Identity();  // body-frame inertia, kg m^2
};

struct BodyConfig {
  Vec3 p = Vec3::Zero();       // world position, m
  UnitQuaternion q;            // body -> world
};

enum class JointKind { kRevolute, kSpherical, kPrismatic, kFixed, kFloating };

// Constraint dimension; free DOFs of the joint plus this always equal 6.
int joint_constraint_dim(JointKind kind);

struct Joint {
  int id = 0;
  JointKind kind = JointKind::kSpherical;
  int parent = kWorldId;       // body id, or kWorldId for the fixed world
  int child = 0;               // body id
  Vec3 parent_anchor = Vec3::Zero();  // parent frame, m
  Vec3 child_anchor = Vec3::Zero();   // child frame, m
  Vec3 axis = Vec3::UnitZ();   // parent frame, revolute/prismatic only
};

enum class ConeMode { kNonlinear, kLinearized };

// Environment surface a contact point collides against.
enum class SurfaceKind { kHalfspace, kSphere };

struct ContactSpec {
  int id = 0;
  int body = 0;
  Vec3 offset = Vec3::Zero();  // contact point in body frame, m
  double radius = 0.0;         // >= 0, 0 = point contact
  double friction = 0.5;       // c_f, dimensionless
  SurfaceKind surface = SurfaceKind::kHalfspace;
  Vec3 surface_normal = Vec3::UnitZ();  // halfspace only, world frame
  double surface_offset = 0.0;          // halfspace only, m
  Vec3 sphere_center = Vec3::Zero();    // static sphere only
  double sphere_radius = 1.0;           // static sphere only
  ConeMode cone_mode = ConeMode::kNonlinear;
};

// Node in the mechanism graph (bodies, joints with l > 0, contacts).
struct GraphNode {
  enum Kind { kBody, kJoint, kContact } kind;
  int index;  // index into the bodies/joints/contacts array
};

struct Mechanism {
  std::vector<Body> bodies;
  std::vector<Joint> joints;
  std::vector<ContactSpec> contacts;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  double timestep = 0.01;

  // Graph data computed by build_mechanism.
  std::vector<GraphNode> nodes;
  std::vector<int> elimination_order;  // node indices, children first
  std::vector<int> node_parent;        // parent node in elimination tree, -1 root
  bool is_tree = false;

  int body_index(int id) const;  // throws on unknown id
};

Mechanism build_mechanism(std::vector<Body> bodies, std::vector<Joint> joints,
                          std::vector<ContactSpec> contacts, const Vec3& gravity,
                          double timestep);

// Joint constraint residual k(xa+, xb+); zero iff the constraint holds.
VecX joint_residual(const Joint& joint, const BodyConfig& xa,
                    const BodyConfig& xb);

// Tangent-space Jacobian of joint_residual, l x 12, column blocks
// [d/dpa, d/d(delta qa), d/dpb, d/d(delta qb)] with quaternion perturbations
// q -> q ⊗ phi_map(delta).
MatX joint_jacobian(const Joint& joint, const BodyConfig& xa,
                    const BodyConfig& xb);

// Two unit vectors completing `axis` to a right-handed orthonormal basis,
// chosen deterministically.
void axis_complement(const Vec3& axis, Vec3* m1, Vec3* m2);

}  // namespace dojo

#endif  // DOJO_MECH_HPP_
