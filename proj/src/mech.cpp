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

#include "dojo/mech.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

namespace dojo {

int joint_constraint_dim(JointKind kind) {
  switch (kind) {
    case JointKind::kRevolute: return 5;
    case JointKind::kSpherical: return 3;
    case JointKind::kPrismatic: return 5;
    case JointKind::kFixed: return 6;
    case JointKind::kFloating: return 0;
  }
  return 0;
}

int Mechanism::body_index(int id) const {
  for (size_t i = 0; i < bodies.size(); ++i) {
    if (bodies[i].id == id) return static_cast<int>(i);
  }
  throw std::invalid_argument("mechanism: unknown body id " + std::to_string(id));
}

void axis_complement(const Vec3& axis, Vec3* m1, Vec3* m2) {
  const Vec3 n = axis.normalized();
  Vec3 seed = std::abs(n.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
  *m1 = (seed - seed.dot(n) * n).normalized();
  *m2 = n.cross(*m1);
}

namespace {

Vec3 world_anchor(const BodyConfig& x, const Vec3& local) {
  return x.p + rotate(x.q, local);
}

// Vector part of the relative rotation qa^-1 ⊗ qb.
Vec3 relative_rotation_vec(const UnitQuaternion& qa, const UnitQuaternion& qb) {
  return quat_mul(qa.conjugate(), qb).v;
}

void validate(const Mechanism& mech) {
  std::set<int> body_ids, joint_ids, contact_ids;
  for (const Body& b : mech.bodies) {
    if (!body_ids.insert(b.id).second) {
      throw std::invalid_argument("mechanism: duplicate body id");
    }
    if (b.m <= 0.0) throw std::invalid_argument("mechanism: mass must be positive");
    if ((b.J - b.J.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("mechanism: inertia must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(b.J);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw std::invalid_argument("mechanism: inertia must be positive definite");
    }
  }
  for (const Joint& j : mech.joints) {
    if (!joint_ids.insert(j.id).second) {
      throw std::invalid_argument("mechanism: duplicate joint id");
    }
    if (j.parent != kWorldId && !body_ids.count(j.parent)) {
      throw std::invalid_argument("mechanism: joint references missing parent body");
    }
    if (!body_ids.count(j.child)) {
      throw std::invalid_argument("mechanism: joint references missing child body");
    }
  }
  for (const ContactSpec& c : mech.contacts) {
    if (!contact_ids.insert(c.id).second) {
      throw std::invalid_argument("mechanism: duplicate contact id");
    }
    if (!body_ids.count(c.body)) {
      throw std::invalid_argument("mechanism: contact references missing body");
    }
    if (c.friction < 0.0) throw std::invalid_argument("mechanism: negative friction");
    if (c.surface == SurfaceKind::kHalfspace &&
        std::abs(c.surface_normal.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("mechanism: surface normal must be unit");
    }
  }
  if (mech.timestep <= 0.0) {
    throw std::invalid_argument("mechanism: timestep must be positive");
  }
}

// Builds adjacency between graph nodes, detects trees, and computes a
// children-first elimination order. Joints attached to the world are used as
// roots so that their zero diagonal block is filled before elimination.
void build_graph(Mechanism* mech) {
  mech->nodes.clear();
  std::vector<int> body_node(mech->bodies.size(), -1);
  for (size_t i = 0; i < mech->bodies.size(); ++i) {
    body_node[i] = static_cast<int>(mech->nodes.size());
    mech->nodes.push_back({GraphNode::kBody, static_cast<int>(i)});
  }
  std::vector<std::vector<int>> adj(mech->nodes.size());
  auto add_node = [&](GraphNode node) {
    mech->nodes.push_back(node);
    adj.emplace_back();
    return static_cast<int>(mech->nodes.size() - 1);
  };
  auto add_edge = [&](int u, int v) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  };

  std::vector<int> world_joints;
  for (size_t m = 0; m < mech->joints.size(); ++m) {
    const Joint& j = mech->joints[m];
    if (joint_constraint_dim(j.kind) == 0) continue;
    int node = add_node({GraphNode::kJoint, static_cast<int>(m)});
    add_edge(node, body_node[mech->body_index(j.child)]);
    if (j.parent == kWorldId) {
      world_joints.push_back(node);
    } else {
      add_edge(node, body_node[mech->body_index(j.parent)]);
    }
  }
  for (size_t c = 0; c < mech->contacts.size(); ++c) {
    int node = add_node({GraphNode::kContact, static_cast<int>(c)});
    add_edge(node, body_node[mech->body_index(mech->contacts[c].body)]);
  }

  const int n = static_cast<int>(mech->nodes.size());
  mech->elimination_order.clear();
  mech->node_parent.assign(n, -1);
  std::vector<char> visited(n, 0);
  bool acyclic = true;

  std::function<void(int, int)> dfs = [&](int u, int parent) {
    visited[u] = 1;
    mech->node_parent[u] = parent;
    for (int v : adj[u]) {
      if (v == parent) {
        parent = -2;  // consume the single parent edge; repeats are cycles
        continue;
      }
      if (visited[v]) {
        acyclic = false;
        continue;
      }
      dfs(v, u);
    }
    mech->elimination_order.push_back(u);
  };

  // Root each component at its world joint when it has exactly one.
  std::vector<char> is_world_joint(n, 0);
  for (int w : world_joints) is_world_joint[w] = 1;
  for (int w : world_joints) {
    if (!visited[w]) dfs(w, -1);
  }
  for (int u = 0; u < n; ++u) {
    if (!visited[u]) dfs(u, -1);
  }
  mech->is_tree = acyclic;
}

}  // namespace

Mechanism build_mechanism(std::vector<Body> bodies, std::vector<Joint> joints,
                          std::vector<ContactSpec> contacts, const Vec3& gravity,
                          double timestep) {
  Mechanism mech;
  mech.bodies = std::move(bodies);
  mech.joints = std::move(joints);
  mech.contacts = std::move(contacts);
  mech.gravity = gravity;
  mech.timestep = timestep;
  validate(mech);
  build_graph(&mech);
  return mech;
}

VecX joint_residual(const Joint& joint, const BodyConfig& xa,
                    const BodyConfig& xb) {
  const int l = joint_constraint_dim(joint.kind);
  VecX k(l);
  switch (joint.kind) {
    case JointKind::kSpherical: {
      k = world_anchor(xb, joint.child_anchor) -
          world_anchor(xa, joint.parent_anchor);
      break;
    }
    case JointKind::kRevolute: {
      k.head<3>() = world_anchor(xb, joint.child_anchor) -
                    world_anchor(xa, joint.parent_anchor);
      Vec3 m1, m2;
      axis_complement(joint.axis, &m1, &m2);
      const Vec3 axis_b = rotate(xb.q, joint.axis);
      k(3) = rotate(xa.q, m1).dot(axis_b);
      k(4) = rotate(xa.q, m2).dot(axis_b);
      break;
    }
    case JointKind::kPrismatic: {
      k.head<3>() = relative_rotation_vec(xa.q, xb.q);
      Vec3 m1, m2;
      axis_complement(joint.axis, &m1, &m2);
      const Vec3 d = world_anchor(xb, joint.child_anchor) -
                     world_anchor(xa, joint.parent_anchor);
      k(3) = rotate(xa.q, m1).dot(d);
      k(4) = rotate(xa.q, m2).dot(d);
      break;
    }
    case JointKind::kFixed: {
      k.head<3>() = world_anchor(xb, joint.child_anchor) -
                    world_anchor(xa, joint.parent_anchor);
      k.tail<3>() = relative_rotation_vec(xa.q, xb.q);
      break;
    }
    case JointKind::kFloating:
      break;
  }
  return k;
}

MatX joint_jacobian(const Joint& joint, const BodyConfig& xa,
                    const BodyConfig& xb) {
  const int l = joint_constraint_dim(joint.kind);
  MatX K = MatX::Zero(l, 12);
  const Mat3 Ra = rotation_matrix(xa.q);
  const Mat3 Rb = rotation_matrix(xb.q);
  // d(R q r)/d(delta) for the perturbation q -> q ⊗ phi_map(delta).
  auto danchor = [](const Mat3& R, const Vec3& r) -> Mat3 {
    return -2.0 * R * skew(r);
  };
  switch (joint.kind) {
    case JointKind::kSpherical: {
      K.block<3, 3>(0, 0) = -Mat3::Identity();
      K.block<3, 3>(0, 3) = -danchor(Ra, joint.parent_anchor);
      K.block<3, 3>(0, 6) = Mat3::Identity();
      K.block<3, 3>(0, 9) = danchor(Rb, joint.child_anchor);
      break;
    }
    case JointKind::kRevolute: {
      K.block<3, 3>(0, 0) = -Mat3::Identity();
      K.block<3, 3>(0, 3) = -danchor(Ra, joint.parent_anchor);
      K.block<3, 3>(0, 6) = Mat3::Identity();
      K.block<3, 3>(0, 9) = danchor(Rb, joint.child_anchor);
      Vec3 m1, m2;
      axis_complement(joint.axis, &m1, &m2);
      const Vec3 axis_b = Rb * joint.axis;
      const Vec3 ms[2] = {m1, m2};
      for (int i = 0; i < 2; ++i) {
        K.block<1, 3>(3 + i, 3) = axis_b.transpose() * danchor(Ra, ms[i]);
        K.block<1, 3>(3 + i, 9) = (Ra * ms[i]).transpose() * danchor(Rb, joint.axis);
      }
      break;
    }
    case JointKind::kPrismatic: {
      const UnitQuaternion q_rel = quat_mul(xa.q.conjugate(), xb.q);
      K.block<3, 3>(0, 3) = -vmat() * rmat(q_rel) * hmat();
      K.block<3, 3>(0, 9) = vmat() * lmat(q_rel) * hmat();
      Vec3 m1, m2;
      axis_complement(joint.axis, &m1, &m2);
      const Vec3 d = world_anchor(xb, joint.child_anchor) -
                     world_anchor(xa, joint.parent_anchor);
      const Vec3 ms[2] = {m1, m2};
      for (int i = 0; i < 2; ++i) {
        const Vec3 w = Ra * ms[i];
        K.block<1, 3>(3 + i, 0) = -w.transpose();
        K.block<1, 3>(3 + i, 3) = d.transpose() * danchor(Ra, ms[i]) -
                                  w.transpose() * danchor(Ra, joint.parent_anchor);
        K.block<1, 3>(3 + i, 6) = w.transpose();
        K.block<1, 3>(3 + i, 9) = w.transpose() * danchor(Rb, joint.child_anchor);
      }
      break;
    }
    case JointKind::kFixed: {
      K.block<3, 3>(0, 0) = -Mat3::Identity();
      K.block<3, 3>(0, 3) = -danchor(Ra, joint.parent_anchor);
      K.block<3, 3>(0, 6) = Mat3::Identity();
      K.block<3, 3>(0, 9) = danchor(Rb, joint.child_anchor);
      const UnitQuaternion q_rel = quat_mul(xa.q.conjugate(), xb.q);
      K.block<3, 3>(3, 3) = -vmat() * rmat(q_rel) * hmat();
      K.block<3, 3>(3, 9) = vmat() * lmat(q_rel) * hmat();
      break;
    }
    case JointKind::kFloating:
      break;
  }
  return K;
}

}  // namespace dojo
