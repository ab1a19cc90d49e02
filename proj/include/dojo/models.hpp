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

// Mechanism builders for the desk-scale experiment models.

#ifndef DOJO_MODELS_HPP_
#define DOJO_MODELS_HPP_

#include <vector>

#include "dojo/mech.hpp"

namespace dojo {
namespace models {

struct BoxParams {
  double mass = 1.0;
  double half_extent = 0.25;  // cube, m
  double friction = 0.4;
  ConeMode cone_mode = ConeMode::kNonlinear;
  double timestep = 0.01;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  // Vertex contact offsets; defaults to the 8 cube corners.
  std::vector<Vec3> vertices;
};

// Rigid cube with point contacts at its vertices against the floor z = 0.
Mechanism make_box(const BoxParams& params);

// Uniform-inertia cube inertia for the given parameters.
Mat3 box_inertia(double mass, double half_extent);

struct ChainParams {
  int links = 3;
  double link_mass = 1.0;
  double link_length = 0.4;
  double link_radius = 0.04;
  JointKind joint = JointKind::kSpherical;
  double timestep = 0.01;
  Vec3 gravity = Vec3::Zero();
  int contacts_on_end_links = 0;  // point contacts at the free tips
  double friction = 0.4;
};

// Free-floating serial chain along +x, consecutive links coupled by joints.
Mechanism make_chain(const ChainParams& params);

// Straight-line configuration the chain builder assumes.
std::vector<BodyConfig> chain_rest_configs(const ChainParams& params,
                                           double base_height = 0.0);

}  // namespace models
}  // namespace dojo

#endif  // DOJO_MODELS_HPP_
