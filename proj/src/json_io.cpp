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

#include "dojo/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dojo {

namespace {

using nlohmann::json;

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("json: expected 3-array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Mat3 mat3_from(const json& j) {
  Mat3 m;
  if (j.is_array() && j.size() == 3 && j[0].is_array()) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  }
  if (j.is_array() && j.size() == 9) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c].get<double>();
    }
    return m;
  }
  throw std::invalid_argument("json: inertia must be a 3x3 or 9-array");
}

json mat3_to(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  }
  return rows;
}

JointKind joint_kind_from(const std::string& s) {
  if (s == "revolute") return JointKind::kRevolute;
  if (s == "spherical") return JointKind::kSpherical;
  if (s == "prismatic") return JointKind::kPrismatic;
  if (s == "fixed") return JointKind::kFixed;
  if (s == "floating") return JointKind::kFloating;
  throw std::invalid_argument("json: unknown joint kind " + s);
}

const char* joint_kind_to(JointKind k) {
  switch (k) {
    case JointKind::kRevolute: return "revolute";
    case JointKind::kSpherical: return "spherical";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kFixed: return "fixed";
    case JointKind::kFloating: return "floating";
  }
  return "spherical";
}

ConeMode cone_mode_from(const std::string& s) {
  if (s == "nonlinear") return ConeMode::kNonlinear;
  if (s == "linearized") return ConeMode::kLinearized;
  throw std::invalid_argument("json: unknown cone_mode " + s);
}

}  // namespace

Mechanism load_mechanism_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc = json::parse(in);

  std::vector<Body> bodies;
  for (const json& jb : doc.at("bodies")) {
    Body b;
    b.id = jb.at("id").get<int>();
    b.m = jb.at("m").get<double>();
    if (jb.contains("J")) b.J = mat3_from(jb.at("J"));
    bodies.push_back(b);
  }
  std::vector<Joint> joints;
  if (doc.contains("joints")) {
    for (const json& jj : doc.at("joints")) {
      Joint j;
      j.id = jj.at("id").get<int>();
      j.kind = joint_kind_from(jj.at("kind").get<std::string>());
      const json& parent = jj.at("parent");
      j.parent = parent.is_string() ? kWorldId : parent.get<int>();
      j.child = jj.at("child").get<int>();
      if (jj.contains("parent_anchor")) j.parent_anchor = vec3_from(jj.at("parent_anchor"));
      if (jj.contains("child_anchor")) j.child_anchor = vec3_from(jj.at("child_anchor"));
      if (jj.contains("axis")) j.axis = vec3_from(jj.at("axis")).normalized();
      joints.push_back(j);
    }
  }
  std::vector<ContactSpec> contacts;
  if (doc.contains("contacts")) {
    for (const json& jc : doc.at("contacts")) {
      ContactSpec c;
      c.id = jc.at("id").get<int>();
      c.body = jc.at("body").get<int>();
      if (jc.contains("offset")) c.offset = vec3_from(jc.at("offset"));
      if (jc.contains("radius")) c.radius = jc.at("radius").get<double>();
      if (jc.contains("friction")) c.friction = jc.at("friction").get<double>();
      if (jc.contains("c_f")) c.friction = jc.at("c_f").get<double>();
      if (jc.contains("surface_normal")) {
        c.surface_normal = vec3_from(jc.at("surface_normal")).normalized();
      }
      if (jc.contains("surface_offset")) {
        c.surface_offset = jc.at("surface_offset").get<double>();
      }
      if (jc.contains("sphere_center")) {
        c.surface = SurfaceKind::kSphere;
        c.sphere_center = vec3_from(jc.at("sphere_center"));
        c.sphere_radius = jc.at("sphere_radius").get<double>();
      }
      if (jc.contains("cone_mode")) {
        c.cone_mode = cone_mode_from(jc.at("cone_mode").get<std::string>());
      }
      contacts.push_back(c);
    }
  }
  const Vec3 gravity = doc.contains("gravity") ? vec3_from(doc.at("gravity"))
                                               : Vec3(0.0, 0.0, -9.81);
  const double timestep = doc.at("timestep").get<double>();
  return build_mechanism(std::move(bodies), std::move(joints),
                         std::move(contacts), gravity, timestep);
}

void save_mechanism_json(const Mechanism& mech, const std::string& path) {
  json doc;
  doc["gravity"] = vec3_to(mech.gravity);
  doc["timestep"] = mech.timestep;
  doc["bodies"] = json::array();
  for (const Body& b : mech.bodies) {
    doc["bodies"].push_back({{"id", b.id}, {"m", b.m}, {"J", mat3_to(b.J)}});
  }
  doc["joints"] = json::array();
  for (const Joint& j : mech.joints) {
    json jj = {{"id", j.id},
               {"kind", joint_kind_to(j.kind)},
               {"child", j.child},
               {"parent_anchor", vec3_to(j.parent_anchor)},
               {"child_anchor", vec3_to(j.child_anchor)},
               {"axis", vec3_to(j.axis)}};
    if (j.parent == kWorldId) {
      jj["parent"] = "world";
    } else {
      jj["parent"] = j.parent;
    }
    doc["joints"].push_back(jj);
  }
  doc["contacts"] = json::array();
  for (const ContactSpec& c : mech.contacts) {
    json jc = {{"id", c.id},
               {"body", c.body},
               {"offset", vec3_to(c.offset)},
               {"radius", c.radius},
               {"friction", c.friction},
               {"cone_mode", c.cone_mode == ConeMode::kNonlinear
                                 ? "nonlinear"
                                 : "linearized"}};
    if (c.surface == SurfaceKind::kHalfspace) {
      jc["surface_normal"] = vec3_to(c.surface_normal);
      jc["surface_offset"] = c.surface_offset;
    } else {
      jc["sphere_center"] = vec3_to(c.sphere_center);
      jc["sphere_radius"] = c.sphere_radius;
    }
    doc["contacts"].push_back(jc);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << doc.dump(2) << "\n";
}

ScenarioConfig load_scenario_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc = json::parse(in);

  ScenarioConfig cfg;
  cfg.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
  if (doc.contains("mechanism_file")) {
    // Relative to the config file's directory.
    std::filesystem::path p = doc.at("mechanism_file").get<std::string>();
    if (p.is_relative()) {
      p = std::filesystem::path(path).parent_path() / p;
    }
    cfg.mechanism_file = p.string();
  }
  if (doc.contains("h")) cfg.h = doc.at("h").get<double>();
  if (doc.contains("T")) cfg.T = doc.at("T").get<int>();
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("cone_mode")) {
    cfg.cone_mode = cone_mode_from(doc.at("cone_mode").get<std::string>());
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("r_tol")) cfg.r_tol = doc.at("r_tol").get<double>();
  if (doc.contains("kappa_tol")) cfg.kappa_tol = doc.at("kappa_tol").get<double>();
  if (doc.contains("drop_height")) cfg.drop_height = doc.at("drop_height").get<double>();
  if (doc.contains("slide_speed")) cfg.slide_speed = doc.at("slide_speed").get<double>();
  if (doc.contains("slide_heading_rad")) {
    cfg.slide_heading_rad = doc.at("slide_heading_rad").get<double>();
  }
  if (doc.contains("force_max")) cfg.force_max = doc.at("force_max").get<double>();
  if (doc.contains("force_samples")) cfg.force_samples = doc.at("force_samples").get<int>();
  if (doc.contains("sysid_trajectories")) {
    cfg.sysid_trajectories = doc.at("sysid_trajectories").get<int>();
  }
  if (doc.contains("sysid_t_configs")) {
    cfg.sysid_t_configs = doc.at("sysid_t_configs").get<int>();
  }
  if (doc.contains("sysid_noise_std")) {
    cfg.sysid_noise_std = doc.at("sysid_noise_std").get<double>();
  }
  if (doc.contains("sysid_perturbation")) {
    cfg.sysid_perturbation = doc.at("sysid_perturbation").get<double>();
  }
  if (doc.contains("sysid_max_gn_iters")) {
    cfg.sysid_max_gn_iters = doc.at("sysid_max_gn_iters").get<int>();
  }
  if (doc.contains("dataset_file")) {
    cfg.dataset_file = doc.at("dataset_file").get<std::string>();
  }
  return cfg;
}

}  // namespace dojo
