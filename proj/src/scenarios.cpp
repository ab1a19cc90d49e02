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

#include "dojo/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dojo/diff.hpp"
#include "dojo/json_io.hpp"
#include "dojo/models.hpp"
#include "dojo/sim.hpp"
#include "dojo/sysid.hpp"

namespace dojo {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

SolverOptions scenario_opts(const ScenarioConfig& cfg, double r_tol_default,
                            double kappa_tol_default) {
  SolverOptions opts;
  opts.r_tol = cfg.r_tol > 0.0 ? cfg.r_tol : r_tol_default;
  opts.kappa_tol = cfg.kappa_tol > 0.0 ? cfg.kappa_tol : kappa_tol_default;
  return opts;
}

void write_lines(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

// Resting height of body 0 above the floor for an upright configuration.
double rest_height(const Mechanism& mech) {
  double h = 0.0;
  for (const ContactSpec& c : mech.contacts) {
    if (c.surface != SurfaceKind::kHalfspace) continue;
    h = std::max(h, c.surface_offset + c.radius - c.offset.z());
  }
  return h;
}

// Box-family scenarios accept a mechanism file; the loaded model replaces
// the built-in cube (timestep and cone mode come from the scenario config).
Mechanism scenario_box(const ScenarioConfig& cfg, ConeMode mode) {
  Mechanism mech;
  if (!cfg.mechanism_file.empty()) {
    mech = load_mechanism_json(cfg.mechanism_file);
    for (ContactSpec& c : mech.contacts) c.cone_mode = mode;
    return build_mechanism(mech.bodies, mech.joints, mech.contacts,
                           mech.gravity, cfg.h);
  }
  models::BoxParams params;
  params.timestep = cfg.h;
  params.cone_mode = mode;
  return models::make_box(params);
}

ScenarioReport run_box_drop(const ScenarioConfig& cfg) {
  ScenarioReport report;
  for (double h : {0.1, 0.01}) {
    ScenarioConfig sub = cfg;
    sub.h = h;
    Mechanism mech = scenario_box(sub, cfg.cone_mode);

    SimState state;
    state.z_curr = {
        BodyConfig{Vec3(0, 0, cfg.drop_height + rest_height(mech)), {}}};
    state.z_prev = state.z_curr;

    SolverOptions opts = scenario_opts(cfg, 1e-10, 1e-8);
    const int steps = std::max(cfg.T, static_cast<int>(std::ceil(1.5 / h)));
    Trajectory traj = simulate(mech, state, nullptr, steps, opts);

    const std::string csv =
        join(cfg.output_dir, "box_drop_h" + fmt_short(h) + ".csv");
    std::ofstream out(csv);
    out << "step,time,min_phi,height\n";
    double min_phi = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < traj.diagnostics.size(); ++t) {
      min_phi = std::min(min_phi, traj.diagnostics[t].min_phi);
      out << t << "," << fmt(t * h) << "," << fmt(traj.diagnostics[t].min_phi)
          << "," << fmt(traj.states[t + 1].z_curr[0].p.z()) << "\n";
    }
    report.output_files.push_back(csv);

    const double settled_phi = traj.diagnostics.back().min_phi;
    const bool pen_ok = min_phi >= -1e-6;
    const bool rest_ok = std::abs(settled_phi) <= 1e-6;
    report.passed = report.passed && pen_ok && rest_ok;
    report.summary_lines.push_back(
        "box_drop h=" + fmt_short(h) + ": min_phi >= -1e-6: " +
        (pen_ok ? "PASS" : "FAIL") + " (min_phi=" + fmt_short(min_phi) +
        "), settled |phi| <= 1e-6: " + (rest_ok ? "PASS" : "FAIL") +
        " (phi=" + fmt_short(settled_phi) + ")");
  }
  write_lines(join(cfg.output_dir, "box_drop.gp"),
              "set datafile separator ','\n"
              "set key autotitle columnhead\n"
              "set xlabel 'time [s]'\n"
              "set ylabel 'min phi [m]'\n"
              "set logscale y\n"
              "plot 'box_drop_h0.1.csv' using 2:(abs($3)+1e-16) with lines, \\\n"
              "     'box_drop_h0.01.csv' using 2:(abs($3)+1e-16) with lines\n");
  report.output_files.push_back(join(cfg.output_dir, "box_drop.gp"));
  return report;
}

ScenarioReport run_box_slide(const ScenarioConfig& cfg) {
  ScenarioReport report;
  const double heading = cfg.slide_heading_rad;
  const Vec3 dir(std::cos(heading), std::sin(heading), 0.0);
  const Vec3 lat(-std::sin(heading), std::cos(heading), 0.0);

  std::ostringstream summary_csv;
  summary_csv << "mode,final_lateral_drift,max_lateral_drift,"
                 "max_friction_angle_rad\n";

  for (ConeMode mode : {ConeMode::kNonlinear, ConeMode::kLinearized}) {
    Mechanism mech = scenario_box(cfg, mode);

    SimState state = init_from_velocity(
        mech, {BodyConfig{Vec3(0, 0, rest_height(mech)), {}}},
        {cfg.slide_speed * dir}, {Vec3::Zero()});
    SolverOptions opts = scenario_opts(cfg, 1e-10, 1e-8);
    const int steps = cfg.T > 0 ? cfg.T : static_cast<int>(1.0 / cfg.h);
    Trajectory traj = simulate(mech, state, nullptr, steps, opts);

    const char* name =
        mode == ConeMode::kNonlinear ? "nonlinear" : "linearized";
    const std::string csv =
        join(cfg.output_dir, std::string("box_slide_") + name + ".csv");
    write_trajectory_csv(traj, mech, csv);
    report.output_files.push_back(csv);

    const Vec3 start = traj.states.front().z_curr[0].p;
    double max_drift = 0.0;
    double max_angle = 0.0;
    for (size_t t = 0; t < traj.diagnostics.size(); ++t) {
      const Vec3 p = traj.states[t + 1].z_curr[0].p;
      max_drift = std::max(max_drift, std::abs((p - start).dot(lat)));
      // Friction direction vs. slip velocity, per contact.
      const std::vector<BodyConfig>& z = traj.states[t].z_curr;
      const std::vector<BodyConfig>& zn = traj.states[t + 1].z_curr;
      for (size_t c = 0; c < mech.contacts.size(); ++c) {
        const ContactSpec& spec = mech.contacts[c];
        const SurfaceFrame frame = surface_frame(spec, z[0]);
        const Vec2 v = tangential_velocity(spec, z[0], zn[0], cfg.h, frame);
        const Vec2 b = traj.impulses[t][c].b;
        if (v.norm() > 1e-4 && b.norm() > 1e-10 &&
            traj.impulses[t][c].gamma > 1e-10) {
          const double cosang =
              std::clamp(-b.dot(v) / (b.norm() * v.norm()), -1.0, 1.0);
          max_angle = std::max(max_angle, std::acos(cosang));
        }
      }
    }
    const double final_drift =
        std::abs((traj.states.back().z_curr[0].p - start).dot(lat));
    summary_csv << name << "," << fmt(final_drift) << "," << fmt(max_drift)
                << "," << fmt(max_angle) << "\n";
    report.summary_lines.push_back(
        std::string("box_slide ") + name + ": lateral drift after " +
        fmt_short(steps * cfg.h) + " s = " + fmt_short(final_drift) +
        " m, max friction-velocity angle = " + fmt_short(max_angle) + " rad");
    if (mode == ConeMode::kNonlinear) {
      const bool ok = final_drift < 1e-6 && max_angle < 1e-3;
      report.passed = report.passed && ok;
      report.summary_lines.push_back(
          std::string("box_slide nonlinear straight-line check: ") +
          (ok ? "PASS" : "FAIL"));
    }
  }
  const std::string sum_path = join(cfg.output_dir, "box_slide_summary.csv");
  write_lines(sum_path, summary_csv.str());
  report.output_files.push_back(sum_path);
  write_lines(join(cfg.output_dir, "box_slide.gp"),
              "set datafile separator ','\n"
              "set key autotitle columnhead\n"
              "set xlabel 'x [m]'\n"
              "set ylabel 'y [m]'\n"
              "set size ratio -1\n"
              "plot 'box_slide_nonlinear.csv' using 3:4 with lines, \\\n"
              "     'box_slide_linearized.csv' using 3:4 with lines\n");
  report.output_files.push_back(join(cfg.output_dir, "box_slide.gp"));
  return report;
}

ScenarioReport run_chain_float(const ScenarioConfig& cfg) {
  ScenarioReport report;
  for (double h : {0.1, 0.01, 0.001}) {
    models::ChainParams params;
    params.links = 3;
    params.timestep = h;
    params.gravity = Vec3::Zero();
    // Stubby links: the random torques on a thin rod's axial inertia would
    // spin it past the half-turn-per-step chart limit at h = 0.1.
    params.link_radius = 0.12;
    Mechanism mech = models::make_chain(params);
    std::vector<BodyConfig> configs = models::chain_rest_configs(params);

    std::mt19937_64 rng(cfg.seed + 17);
    std::uniform_real_distribution<double> u(0.0, 0.05);
    const int actuation_steps = static_cast<int>(std::round(1.0 / h));
    Controller controller = [&](int t) {
      std::vector<BodyInput> inputs(params.links);
      if (t < actuation_steps) {
        for (auto& in : inputs) {
          in.f = Vec3(u(rng), u(rng), u(rng));
          in.tau = Vec3(u(rng), u(rng), u(rng));
        }
      }
      return inputs;
    };

    SolverOptions opts = scenario_opts(cfg, 1e-12, 1e-10);
    const int coast_steps = static_cast<int>(std::round(10.0 / h));
    SimState state{configs, configs};
    Trajectory traj =
        simulate(mech, state, controller, actuation_steps + coast_steps, opts);

    const std::string csv =
        join(cfg.output_dir, "chain_float_h" + fmt_short(h) + ".csv");
    std::ofstream out(csv);
    out << "step,time,energy,lin_mom_x,lin_mom_y,lin_mom_z,ang_mom_x,"
           "ang_mom_y,ang_mom_z\n";
    for (size_t t = 0; t < traj.diagnostics.size(); ++t) {
      const StepDiagnostics& d = traj.diagnostics[t];
      out << t << "," << fmt(t * h) << "," << fmt(d.energy) << ","
          << fmt(d.linear_momentum.x()) << "," << fmt(d.linear_momentum.y())
          << "," << fmt(d.linear_momentum.z()) << ","
          << fmt(d.angular_momentum.x()) << "," << fmt(d.angular_momentum.y())
          << "," << fmt(d.angular_momentum.z()) << "\n";
    }
    report.output_files.push_back(csv);

    const StepDiagnostics& first = traj.diagnostics[actuation_steps];
    const StepDiagnostics& last = traj.diagnostics.back();
    const double lin_drift =
        (last.linear_momentum - first.linear_momentum).norm() /
        std::max(first.linear_momentum.norm(), 1e-12);
    const double ang_drift =
        (last.angular_momentum - first.angular_momentum).norm() /
        std::max(first.angular_momentum.norm(), 1e-12);
    const bool ok = lin_drift < 1e-8 && ang_drift < 1e-8;
    report.passed = report.passed && ok;
    report.summary_lines.push_back(
        "chain_float h=" + fmt_short(h) + ": momentum drift over coast lin=" +
        fmt_short(lin_drift) + " ang=" + fmt_short(ang_drift) + " " +
        (ok ? "PASS" : "FAIL"));
  }
  write_lines(join(cfg.output_dir, "chain_float.gp"),
              "set datafile separator ','\n"
              "set key autotitle columnhead\n"
              "set xlabel 'time [s]'\n"
              "set ylabel 'energy [J]'\n"
              "plot 'chain_float_h0.1.csv' using 2:3 with lines, \\\n"
              "     'chain_float_h0.01.csv' using 2:3 with lines, \\\n"
              "     'chain_float_h0.001.csv' using 2:3 with lines\n");
  report.output_files.push_back(join(cfg.output_dir, "chain_float.gp"));
  return report;
}

ScenarioReport run_grad_sweep(const ScenarioConfig& cfg) {
  ScenarioReport report;
  Mechanism mech = scenario_box(cfg, cfg.cone_mode);
  SimState state;
  state.z_curr = {BodyConfig{Vec3(0, 0, rest_height(mech)), {}}};
  state.z_prev = state.z_curr;

  const double mg = mech.bodies[0].m * std::abs(mech.gravity.z());
  const double fmax = cfg.force_max > 0.0 ? cfg.force_max : 2.0 * mg;
  const std::vector<double> kappas = {1e-2, 1e-3, 3e-4};
  SolverOptions opts = scenario_opts(cfg, 1e-10, 1e-8);

  const std::string csv = join(cfg.output_dir, "grad_sweep.csv");
  std::ofstream out(csv);
  out << "f_z,grad_kappa1e-2,grad_kappa1e-3,grad_kappa3e-4\n";
  std::vector<std::vector<double>> curves(kappas.size());
  for (int s = 0; s < cfg.force_samples; ++s) {
    const double f = fmax * s / (cfg.force_samples - 1);
    out << fmt(f);
    for (size_t k = 0; k < kappas.size(); ++k) {
      std::vector<BodyInput> u(1);
      u[0].f = Vec3(0.0, 0.0, f);
      const RelaxedStep rs = relaxed_step(mech, state, u, kappas[k], opts);
      const StepJacobians jac =
          implicit_step_gradients(*rs.problem, rs.solve, kappas[k], opts);
      const double g = jac.d_u(2, 2);
      curves[k].push_back(g);
      out << "," << fmt(g);
    }
    out << "\n";
  }
  report.output_files.push_back(csv);

  // The softest curve must be monotone below the activation threshold.
  bool monotone = true;
  const int pre = static_cast<int>(0.9 * mg / fmax * (cfg.force_samples - 1));
  for (int s = 1; s <= pre && s < cfg.force_samples; ++s) {
    if (curves[0][s] < curves[0][s - 1] - 1e-12) monotone = false;
  }
  report.passed = report.passed && monotone;
  report.summary_lines.push_back(
      std::string("grad_sweep: kappa=1e-2 gradient monotone pre-threshold: ") +
      (monotone ? "PASS" : "FAIL"));
  write_lines(join(cfg.output_dir, "grad_sweep.gp"),
              "set datafile separator ','\n"
              "set key autotitle columnhead\n"
              "set xlabel 'f_z [N]'\n"
              "set ylabel 'd height / d f_z [m/N]'\n"
              "plot 'grad_sweep.csv' using 1:2 with lines, \\\n"
              "     'grad_sweep.csv' using 1:3 with lines, \\\n"
              "     'grad_sweep.csv' using 1:4 with lines\n");
  report.output_files.push_back(join(cfg.output_dir, "grad_sweep.gp"));
  return report;
}

ScenarioReport run_sysid(const ScenarioConfig& cfg) {
  ScenarioReport report;
  const SysidConfig sc = sysid_scenario_config(cfg);
  const SysidParams truth = sysid_scenario_truth(sc);

  Dataset dataset;
  if (!cfg.dataset_file.empty()) {
    dataset = read_dataset_csv(cfg.dataset_file);
  } else {
    dataset = make_synthetic_dataset(truth, sc, cfg.sysid_trajectories,
                                     cfg.seed, cfg.sysid_noise_std,
                                     cfg.sysid_t_configs);
    const std::string data_path = join(cfg.output_dir, "sysid_dataset.csv");
    write_dataset_csv(dataset, data_path);
    report.output_files.push_back(data_path);
  }

  std::mt19937_64 rng(cfg.seed + 99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SysidParams theta0 = truth;
  theta0.c_f *= 1.0 + cfg.sysid_perturbation * u(rng);
  for (auto& v : theta0.vertices) {
    for (int k = 0; k < 3; ++k) {
      v(k) *= 1.0 + cfg.sysid_perturbation * u(rng);
    }
  }

  const SysidResult fit =
      sysid_fit(dataset, theta0, sc, VecX(), cfg.sysid_max_gn_iters);

  const double cf_err = std::abs(fit.params.c_f - truth.c_f) / truth.c_f;
  double vert_err = 0.0;
  for (int i = 0; i < 8; ++i) {
    vert_err = std::max(vert_err,
                        (fit.params.vertices[i] - truth.vertices[i]).norm() /
                            truth.vertices[i].norm());
  }
  const bool ok = cf_err <= 0.05 && vert_err <= 0.05;
  report.passed = ok;
  report.summary_lines.push_back(
      "sysid: c_f error " + fmt_short(100.0 * cf_err) +
      "%, worst vertex error " + fmt_short(100.0 * vert_err) +
      "%: " + (ok ? "PASS" : "FAIL") + " (" + std::to_string(fit.iterations) +
      " iterations, " + std::to_string(fit.skipped) + " skipped triplets)");

  const std::string trace_path = join(cfg.output_dir, "sysid_trace.csv");
  std::ofstream out(trace_path);
  out << "iteration,loss\n";
  for (size_t i = 0; i < fit.loss_trace.size(); ++i) {
    out << i << "," << fmt(fit.loss_trace[i]) << "\n";
  }
  report.output_files.push_back(trace_path);

  const std::string params_path = join(cfg.output_dir, "sysid_params.csv");
  std::ofstream pout(params_path);
  pout << "name,learned,truth\n";
  pout << "c_f," << fmt(fit.params.c_f) << "," << fmt(truth.c_f) << "\n";
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 3; ++k) {
      pout << "v" << i << "_" << "xyz"[k] << ","
           << fmt(fit.params.vertices[i](k)) << "," << fmt(truth.vertices[i](k))
           << "\n";
    }
  }
  report.output_files.push_back(params_path);
  write_lines(join(cfg.output_dir, "sysid.gp"),
              "set datafile separator ','\n"
              "set key autotitle columnhead\n"
              "set xlabel 'Gauss-Newton iteration'\n"
              "set ylabel 'loss'\n"
              "set logscale y\n"
              "plot 'sysid_trace.csv' using 1:2 with linespoints\n");
  report.output_files.push_back(join(cfg.output_dir, "sysid.gp"));
  return report;
}

}  // namespace

SysidConfig sysid_scenario_config(const ScenarioConfig& config) {
  SysidConfig sc;
  sc.timestep = config.h;
  sc.cone_mode = config.cone_mode;
  sc.opts = scenario_opts(config, 1e-8, 1e-7);
  return sc;
}

SysidParams sysid_scenario_truth(const SysidConfig& config) {
  SysidParams truth;
  truth.c_f = 0.4;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) {
        truth.vertices.emplace_back(sx * config.half_extent,
                                    sy * config.half_extent,
                                    sz * config.half_extent);
      }
    }
  }
  return truth;
}

ScenarioKind scenario_from_string(const std::string& name) {
  if (name == "box_drop") return ScenarioKind::kBoxDrop;
  if (name == "box_slide") return ScenarioKind::kBoxSlide;
  if (name == "chain_float") return ScenarioKind::kChainFloat;
  if (name == "grad_sweep") return ScenarioKind::kGradSweep;
  if (name == "sysid") return ScenarioKind::kSysid;
  throw std::invalid_argument("unknown scenario: " + name);
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kBoxDrop: return "box_drop";
    case ScenarioKind::kBoxSlide: return "box_slide";
    case ScenarioKind::kChainFloat: return "chain_float";
    case ScenarioKind::kGradSweep: return "grad_sweep";
    case ScenarioKind::kSysid: return "sysid";
  }
  return "unknown";
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  fs::create_directories(config.output_dir);
  switch (config.scenario) {
    case ScenarioKind::kBoxDrop: return run_box_drop(config);
    case ScenarioKind::kBoxSlide: return run_box_slide(config);
    case ScenarioKind::kChainFloat: return run_chain_float(config);
    case ScenarioKind::kGradSweep: return run_grad_sweep(config);
    case ScenarioKind::kSysid: return run_sysid(config);
  }
  throw std::invalid_argument("unknown scenario");
}

}  // namespace dojo
