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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "dojo/json_io.hpp"
#include "dojo/models.hpp"
#include "dojo/sim.hpp"

using namespace dojo;

TEST_CASE("mechanism JSON round trip") {
  models::ChainParams params;
  params.links = 3;
  params.contacts_on_end_links = 2;
  params.joint = JointKind::kRevolute;
  Mechanism mech = models::make_chain(params);
  mech.contacts[0].cone_mode = ConeMode::kLinearized;

  const std::string path = "/tmp/dojo_test_mech.json";
  save_mechanism_json(mech, path);
  const Mechanism back = load_mechanism_json(path);

  REQUIRE(back.bodies.size() == mech.bodies.size());
  REQUIRE(back.joints.size() == mech.joints.size());
  REQUIRE(back.contacts.size() == mech.contacts.size());
  for (size_t i = 0; i < mech.bodies.size(); ++i) {
    CHECK(back.bodies[i].id == mech.bodies[i].id);
    CHECK(back.bodies[i].m == mech.bodies[i].m);
    CHECK((back.bodies[i].J - mech.bodies[i].J).cwiseAbs().maxCoeff() == 0.0);
  }
  for (size_t i = 0; i < mech.joints.size(); ++i) {
    CHECK(back.joints[i].kind == mech.joints[i].kind);
    CHECK(back.joints[i].parent == mech.joints[i].parent);
    CHECK(back.joints[i].child == mech.joints[i].child);
    CHECK((back.joints[i].parent_anchor - mech.joints[i].parent_anchor).norm() ==
          0.0);
  }
  CHECK(back.contacts[0].cone_mode == ConeMode::kLinearized);
  CHECK(back.contacts[1].cone_mode == ConeMode::kNonlinear);
  CHECK(back.timestep == mech.timestep);
  CHECK((back.gravity - mech.gravity).norm() == 0.0);
  CHECK(back.is_tree == mech.is_tree);
  std::remove(path.c_str());
}

TEST_CASE("world joints serialize via the string parent") {
  Joint j;
  j.id = 0;
  j.kind = JointKind::kSpherical;
  j.parent = kWorldId;
  j.child = 0;
  Body b;
  b.id = 0;
  Mechanism mech = build_mechanism({b}, {j}, {}, Vec3::Zero(), 0.05);
  const std::string path = "/tmp/dojo_test_world.json";
  save_mechanism_json(mech, path);
  const Mechanism back = load_mechanism_json(path);
  CHECK(back.joints[0].parent == kWorldId);
  std::remove(path.c_str());
}

TEST_CASE("scenario config parsing with relative mechanism path") {
  const std::string dir = "/tmp";
  const std::string path = dir + "/dojo_test_scenario.json";
  {
    std::ofstream out(path);
    out << R"({
      "scenario": "box_slide",
      "mechanism_file": "mech.json",
      "h": 0.02,
      "T": 17,
      "seed": 5,
      "cone_mode": "linearized",
      "output_dir": "/tmp/out",
      "slide_speed": 2.0,
      "slide_heading_rad": 0.5
    })";
  }
  const ScenarioConfig cfg = load_scenario_json(path);
  CHECK(cfg.scenario == ScenarioKind::kBoxSlide);
  CHECK(cfg.mechanism_file == "/tmp/mech.json");
  CHECK(cfg.h == 0.02);
  CHECK(cfg.T == 17);
  CHECK(cfg.seed == 5);
  CHECK(cfg.cone_mode == ConeMode::kLinearized);
  CHECK(cfg.slide_speed == 2.0);
  CHECK(cfg.slide_heading_rad == 0.5);
  std::remove(path.c_str());
}

TEST_CASE("malformed documents raise invalid_argument/runtime_error") {
  CHECK_THROWS(load_mechanism_json("/nonexistent/file.json"));
  const std::string path = "/tmp/dojo_test_bad.json";
  {
    std::ofstream out(path);
    out << R"({"bodies": [{"id": 0, "m": 1.0}], "timestep": 0})";
  }
  CHECK_THROWS(load_mechanism_json(path));
  std::remove(path.c_str());
}

TEST_CASE("trajectory CSV has the documented layout") {
  models::BoxParams params;
  params.vertices = {Vec3(0.0, 0.0, -0.25)};
  Mechanism mech = models::make_box(params);
  SimState state;
  state.z_curr = {BodyConfig{Vec3(0, 0, 0.3), {}}};
  state.z_prev = state.z_curr;
  SolverOptions opts;
  Trajectory traj = simulate(mech, state, nullptr, 3, opts);
  const std::string path = "/tmp/dojo_test_traj.csv";
  write_trajectory_csv(traj, mech, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "step,time,b0_px,b0_py,b0_pz,b0_qs,b0_qx,b0_qy,b0_qz,"
        "c0_gamma,c0_b1,c0_b2,c0_phi,"
        "energy,lin_mom_x,lin_mom_y,lin_mom_z,ang_mom_x,ang_mom_y,ang_mom_z,"
        "min_phi,iterations");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);
  std::remove(path.c_str());
}
