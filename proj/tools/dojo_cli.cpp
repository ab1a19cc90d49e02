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

// Experiment harness CLI: runs the desk-scale scenarios, generates synthetic
// system-identification datasets, and fits parameters from dataset files.
//
// Exit codes: 0 success, 1 scenario assertion failure, 2 solver failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dojo/json_io.hpp"
#include "dojo/scenarios.hpp"
#include "dojo/sim.hpp"
#include "dojo/sysid.hpp"

namespace {

int run_config(const std::string& config_path, const std::string& dataset) {
  dojo::ScenarioConfig cfg = dojo::load_scenario_json(config_path);
  if (!dataset.empty()) cfg.dataset_file = dataset;
  const dojo::ScenarioReport report = dojo::run_scenario(cfg);
  for (const std::string& line : report.summary_lines) {
    std::cout << line << "\n";
  }
  for (const std::string& f : report.output_files) {
    std::cout << "wrote " << f << "\n";
  }
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentiable rigid-body contact simulation experiments"};
  app.require_subcommand(1);

  std::string run_config_path;
  CLI::App* run = app.add_subcommand("run", "run a scenario from a JSON config");
  run->add_option("config", run_config_path, "scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string sysid_dataset, sysid_config;
  CLI::App* sysid = app.add_subcommand(
      "sysid", "fit box parameters from a dataset of configuration triplets");
  sysid->add_option("dataset", sysid_dataset, "dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sysid->add_option("config", sysid_config, "scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string gen_config;
  CLI::App* gen =
      app.add_subcommand("gen-data", "generate a synthetic box-toss dataset");
  gen->add_option("config", gen_config, "scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_config(run_config_path, "");
    }
    if (sysid->parsed()) {
      return run_config(sysid_config, sysid_dataset);
    }
    if (gen->parsed()) {
      dojo::ScenarioConfig cfg = dojo::load_scenario_json(gen_config);
      const dojo::SysidConfig sc = dojo::sysid_scenario_config(cfg);
      const dojo::SysidParams truth = dojo::sysid_scenario_truth(sc);
      const dojo::Dataset dataset = dojo::make_synthetic_dataset(
          truth, sc, cfg.sysid_trajectories, cfg.seed, cfg.sysid_noise_std,
          cfg.sysid_t_configs);
      const std::string path = cfg.dataset_file.empty()
                                   ? cfg.output_dir + "/sysid_dataset.csv"
                                   : cfg.dataset_file;
      dojo::write_dataset_csv(dataset, path);
      std::cout << "wrote " << path << " (" << dataset.size() << " triplets)\n";
      return 0;
    }
  } catch (const dojo::SimError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
