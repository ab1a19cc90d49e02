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

// Mechanism description files and scenario configuration files (JSON).

#ifndef DOJO_JSON_IO_HPP_
#define DOJO_JSON_IO_HPP_

#include <string>

#include "dojo/mech.hpp"
#include "dojo/scenarios.hpp"

namespace dojo {

// Mechanism document: arrays "bodies", "joints", "contacts" and scalars
// "gravity" (3-array), "timestep".
Mechanism load_mechanism_json(const std::string& path);
void save_mechanism_json(const Mechanism& mech, const std::string& path);

ScenarioConfig load_scenario_json(const std::string& path);

}  // namespace dojo

#endif  // DOJO_JSON_IO_HPP_
