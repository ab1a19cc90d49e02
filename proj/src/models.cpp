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

#include "dojo/models.hpp"

namespace dojo {
namespace models {

Mat3 box_inertia(double mass, double half_extent) {
  const double side = 2.0 * half_extent;
  return mass * side * side / 6.0 * Mat3::Identity();
}

Mechanism make_box(const BoxParams& params) {
  Body body;
  body.id = 0;
  body.m = params.mass;
  body.J = box_inertia(params.mass, params.half_extent);

  std::vector<Vec3> vertices = params.vertices;
  if (vertices.empty()) {
    const double a = params.half_extent;
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        for (int sz : {-1, 1}) {
          vertices.emplace_back(sx * a, sy * a, sz * a);
        }
      }
    }
  }
  std::vector<ContactSpec> contacts;
  for (size_t i = 0; i < vertices.size(); ++i) {
    ContactSpec c;
    c.id = static_cast<int>(i);
    c.body = 0;
    c.offset = vertices[i];
    c.friction = params.friction;
    c.cone_mode = params.cone_mode;
    contacts.push_back(c);
  }
  return build_mechanism({body}, {}, contacts, params.gravity, params.timestep);
}

Mechanism make_chain(const ChainParams& params) {
  std::vector<Body> bodies;
  std::vector<Joint> joints;
  std::vector<ContactSpec> contacts;
  const double len = params.link_length;
  const double r = params.link_radius;
  // Solid-rod inertia about the center, axis along x.
  Mat3 J = Mat3::Zero();
  J(0, 0) = 0.5 * params.link_mass * r * r;
  J(1, 1) = J(2, 2) = params.link_mass * (3.0 * r * r + len * len) / 12.0;

  for (int i = 0; i < params.links; ++i) {
    Body b;
    b.id = i;
    b.m = params.link_mass;
    b.J = J;
    bodies.push_back(b);
  }
  for (int i = 0; i + 1 < params.links; ++i) {
    Joint j;
    j.id = i;
    j.kind = params.joint;
    j.parent = i;
    j.child = i + 1;
    j.parent_anchor = Vec3(0.5 * len, 0.0, 0.0);
    j.child_anchor = Vec3(-0.5 * len, 0.0, 0.0);
    j.axis = Vec3::UnitZ();
    joints.push_back(j);
  }
  if (params.contacts_on_end_links > 0 && params.links > 0) {
    ContactSpec c0;
    c0.id = 0;
    c0.body = 0;
    c0.offset = Vec3(-0.5 * len, 0.0, 0.0);
    c0.friction = params.friction;
    contacts.push_back(c0);
    if (params.contacts_on_end_links > 1 && params.links > 1) {
      ContactSpec c1;
      c1.id = 1;
      c1.body = params.links - 1;
      c1.offset = Vec3(0.5 * len, 0.0, 0.0);
      c1.friction = params.friction;
      contacts.push_back(c1);
    }
  }
  return build_mechanism(bodies, joints, contacts, params.gravity,
                         params.timestep);
}

std::vector<BodyConfig> chain_rest_configs(const ChainParams& params,
                                           double base_height) {
  std::vector<BodyConfig> configs(params.links);
  for (int i = 0; i < params.links; ++i) {
    configs[i].p = Vec3(i * params.link_length, 0.0, base_height);
    configs[i].q = UnitQuaternion::identity();
  }
  return configs;
}

}  // namespace models
}  // namespace dojo
