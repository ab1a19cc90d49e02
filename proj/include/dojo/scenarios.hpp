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

// Experiment harness: the desk-scale scenarios, their CSV outputs, and
// gnuplot scripts.

#ifndef DOJO_SCENARIOS_HPP_
#define DOJO_SCENARIOS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dojo/mech.hpp"
#include "dojo/sysid.hpp"

namespace dojo {

enum class ScenarioKind {
  kBoxDrop,
  kBoxSlide,
  kChainFloat,
  kGradSweep,
  kSysid,
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::kBoxDrop;
  std::string mechanism_file;  // optional; scenarios have built-in models
  double h = 0.01;
  int T = 100;
  std::uint64_t seed = 0;
  ConeMode cone_mode = ConeMode::kNonlinear;
  std::string output_dir = ".";

  // Solver overrides (0 keeps the scenario default).
  double r_tol = 0.0;
  double kappa_tol = 0.0;

  // box_drop
  double drop_height = 1.0;

  // box_slide. The default heading is misaligned with both the cone
  // vertices and their bisector; the exact bisector (45 deg) is a symmetric
  // tie where even the 4-vertex cone produces no lateral drift.
  double slide_speed = 1.0;
  double slide_heading_rad = 0.69813170079773179;  // 40 degrees

  // grad_sweep
  double force_max = 0.0;  // 0: defaults to 2 m g
  int force_samples = 41;

  // sysid
  int sysid_trajectories = 50;
  int sysid_t_configs = 100;
  double sysid_noise_std = 0.0;
  double sysid_perturbation = 0.2;
  int sysid_max_gn_iters = 30;
  std::string dataset_file;
};

struct ScenarioReport {
  bool passed = true;
  std::vector<std::string> summary_lines;
  std::vector<std::string> output_files;
};

// Runs the scenario, writes CSVs and a gnuplot script into output_dir, and
// returns pass/fail plus summary lines. Throws SimError on solver failure.
ScenarioReport run_scenario(const ScenarioConfig& config);

ScenarioKind scenario_from_string(const std::string& name);
const char* to_string(ScenarioKind kind);

// Shared by `run sysid` and `gen-data`: the data-generating step map and the
// fit's prediction map must use identical solver settings.
SysidConfig sysid_scenario_config(const ScenarioConfig& config);
SysidParams sysid_scenario_truth(const SysidConfig& config);

}  // namespace dojo

#endif  // DOJO_SCENARIOS_HPP_
