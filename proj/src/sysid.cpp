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

#include "dojo/sysid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dojo/diff.hpp"

namespace dojo {

namespace {

constexpr int kNumVertices = 8;

std::vector<Vec3> default_vertices(double a) {
  std::vector<Vec3> v;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) v.emplace_back(sx * a, sy * a, sz * a);
    }
  }
  return v;
}

// Per-triplet prediction residual and its Jacobian w.r.t. the packed
// parameters, via the implicit step gradients.
struct TripletEval {
  bool ok = false;
  VecX residual;  // 6 per body
  MatX jac;       // 6N x 25, empty when gradients are not requested
};

TripletEval eval_triplet(const Triplet& triplet, const Mechanism& mech,
                         const SysidConfig& cfg, bool want_jacobian) {
  TripletEval out;
  try {
    const SimState state{triplet.z_prev, triplet.z};
    std::vector<BodyInput> u(mech.bodies.size());
    // The prediction uses the same hard step map as the data; only the
    // Jacobian comes from the smooth relaxed problem at kappa_grad.
    SolverOptions opts = cfg.opts;
    opts.kappa_grad_cache = want_jacobian ? cfg.kappa_grad : 0.0;
    const StepResult rs = step(mech, state, u, opts);
    // residual = predicted ⊖ observed, orientation part in tangent space.
    const size_t nb = rs.z_next.size();
    out.residual.resize(6 * nb);
    for (size_t i = 0; i < nb; ++i) {
      out.residual.segment<3>(6 * i) = rs.z_next[i].p - triplet.z_next[i].p;
      out.residual.segment<3>(6 * i + 3) =
          quat_mul(triplet.z_next[i].q.conjugate(), rs.z_next[i].q).v;
    }
    if (want_jacobian) {
      const StepJacobians sj = implicit_step_gradients(
          *rs.problem, rs.solve, cfg.kappa_grad, opts, /*params_only=*/true);
      const ThetaLayout& th = sj.theta;
      // Chain rule for the orientation rows of the residual.
      MatX chain = MatX::Identity(6 * nb, 6 * nb);
      for (size_t i = 0; i < nb; ++i) {
        const UnitQuaternion rel =
            quat_mul(triplet.z_next[i].q.conjugate(), rs.z_next[i].q);
        chain.block<3, 3>(6 * i + 3, 6 * i + 3) = vmat() * lmat(rel) * hmat();
      }
      // Map engine parameter columns onto the packed (c_f, vertices) vector.
      const int p = 1 + 3 * kNumVertices;
      out.jac = MatX::Zero(6 * nb, p);
      const MatX d_params = chain * sj.d_params;
      // d_params columns: cf (P), offsets (3P), mass (N), inertia (6N), h.
      const int n_contacts = th.n_contacts;
      for (int c = 0; c < n_contacts; ++c) {
        out.jac.col(0) += d_params.col(c);
        out.jac.middleCols(1 + 3 * c, 3) =
            d_params.middleCols(n_contacts + 3 * c, 3);
      }
    }
    out.ok = true;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

struct BatchEval {
  double loss = 0.0;
  VecX gradient;
  MatX hessian;
  int skipped = 0;
};

// Deterministic reduction: per-triplet partials are stored and reduced in
// dataset order regardless of thread scheduling.
BatchEval batch_eval(const Dataset& dataset, const Mechanism& mech,
                     const SysidConfig& cfg, const VecX& weights,
                     bool want_derivatives) {
  const int p = 1 + 3 * kNumVertices;
  const int n = static_cast<int>(dataset.size());
  std::vector<TripletEval> evals(n);
#ifdef DOJO_HAS_OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
#endif
  for (int t = 0; t < n; ++t) {
    evals[t] = eval_triplet(dataset[t], mech, cfg, want_derivatives);
  }

  BatchEval out;
  out.gradient = VecX::Zero(p);
  out.hessian = MatX::Zero(p, p);
  for (int t = 0; t < n; ++t) {
    const TripletEval& ev = evals[t];
    if (!ev.ok) {
      ++out.skipped;
      continue;
    }
    VecX w = weights;
    if (w.size() == 0) w = VecX::Ones(ev.residual.size());
    const VecX wr = w.cwiseProduct(ev.residual);
    out.loss += 0.5 * ev.residual.dot(wr);
    if (want_derivatives) {
      out.gradient += ev.jac.transpose() * wr;
      out.hessian += ev.jac.transpose() * w.asDiagonal() * ev.jac;
    }
  }
  return out;
}

}  // namespace

VecX SysidParams::pack() const {
  VecX x(1 + 3 * kNumVertices);
  x(0) = c_f;
  for (int i = 0; i < kNumVertices; ++i) x.segment<3>(1 + 3 * i) = vertices[i];
  return x;
}

SysidParams SysidParams::unpack(const VecX& x) {
  SysidParams p;
  p.c_f = x(0);
  p.vertices.resize(kNumVertices);
  for (int i = 0; i < kNumVertices; ++i) p.vertices[i] = x.segment<3>(1 + 3 * i);
  return p;
}

Mechanism sysid_mechanism(const SysidParams& params, const SysidConfig& cfg) {
  models::BoxParams box;
  box.mass = cfg.mass;
  box.half_extent = cfg.half_extent;
  box.friction = params.c_f;
  box.cone_mode = cfg.cone_mode;
  box.timestep = cfg.timestep;
  box.gravity = cfg.gravity;
  box.vertices = params.vertices.empty() ? default_vertices(cfg.half_extent)
                                         : params.vertices;
  return models::make_box(box);
}

double sysid_loss(const Dataset& dataset, const SysidParams& params,
                  const SysidConfig& cfg, const VecX& weights, int* skipped) {
  const Mechanism mech = sysid_mechanism(params, cfg);
  const BatchEval ev = batch_eval(dataset, mech, cfg, weights, false);
  if (skipped != nullptr) *skipped = ev.skipped;
  return ev.loss;
}

SysidResult sysid_fit(const Dataset& dataset, const SysidParams& theta0,
                      const SysidConfig& cfg, const VecX& weights,
                      int max_gn_iters) {
  SysidResult result;
  VecX theta = theta0.pack();

  Mechanism mech = sysid_mechanism(SysidParams::unpack(theta), cfg);
  BatchEval ev = batch_eval(dataset, mech, cfg, weights, true);
  result.skipped = ev.skipped;
  result.loss_trace.push_back(ev.loss);

  double damping = 1e-6;
  for (int iter = 0; iter < max_gn_iters; ++iter) {
    if (ev.loss < 1e-14) {
      result.converged = true;
      break;
    }
    result.iterations = iter + 1;
    bool accepted = false;
    double new_loss = ev.loss;
    VecX theta_new;
    for (int attempt = 0; attempt < 30; ++attempt) {
      MatX h = ev.hessian;
      // Marquardt scaling keeps weakly observed directions from freezing
      // under the damping needed by the strong ones.
      const double floor = 1e-10 * (h.diagonal().maxCoeff() + 1e-300);
      h.diagonal() += damping * h.diagonal().cwiseMax(floor);
      Eigen::LDLT<MatX> ldlt(h);
      if (ldlt.info() != Eigen::Success) {
        damping *= 10.0;
        continue;
      }
      const VecX step = ldlt.solve(-ev.gradient);
      if (!step.allFinite()) {
        damping *= 10.0;
        continue;
      }
      theta_new = theta + step;
      const double candidate =
          sysid_loss(dataset, SysidParams::unpack(theta_new), cfg, weights);
      if (candidate < ev.loss) {
        new_loss = candidate;
        accepted = true;
        damping = std::max(damping / 10.0, 1e-12);
        break;
      }
      damping *= 10.0;
    }
    result.damping_trace.push_back(damping);
    if (!accepted) {
      // A zero gradient (already at the optimum) is convergence, not failure.
      if (ev.gradient.cwiseAbs().maxCoeff() < 1e-12) {
        result.converged = true;
        break;
      }
      throw std::runtime_error(
          "sysid_fit: no descent after maximal damping (see trace)");
    }
    const double rel_decrease = (ev.loss - new_loss) / std::max(ev.loss, 1e-300);
    theta = theta_new;
    mech = sysid_mechanism(SysidParams::unpack(theta), cfg);
    ev = batch_eval(dataset, mech, cfg, weights, true);
    result.loss_trace.push_back(ev.loss);
    if (rel_decrease < 1e-8) {
      result.converged = true;
      break;
    }
  }
  result.params = SysidParams::unpack(theta);
  result.final_hessian = ev.hessian;
  result.skipped = ev.skipped;
  return result;
}

Dataset make_synthetic_dataset(const SysidParams& truth, const SysidConfig& cfg,
                               int n_traj, std::uint64_t seed,
                               double noise_std, int t_configs) {
  if (n_traj < 1) {
    throw std::invalid_argument("make_synthetic_dataset: n_traj < 1");
  }
  if (t_configs < 3) {
    throw std::invalid_argument("make_synthetic_dataset: need >= 3 configs");
  }
  const Mechanism mech = sysid_mechanism(truth, cfg);
  const int steps = t_configs - 2;

  std::vector<std::vector<std::vector<BodyConfig>>> configs(n_traj);
#ifdef DOJO_HAS_OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
#endif
  for (int traj = 0; traj < n_traj; ++traj) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (traj + 1));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> gauss01(0.0, 1.0);
    BodyConfig start;
    start.p = Vec3(u(rng), u(rng), 0.5 + 0.15 * u(rng));
    // Uniform random orientation so every vertex strikes the floor across
    // the dataset; otherwise the up-facing vertices stay unidentifiable.
    Vec4 q(gauss01(rng), gauss01(rng), gauss01(rng), gauss01(rng));
    start.q = UnitQuaternion::from_vec4(q.normalized());
    const Vec3 vel(u(rng), u(rng), 0.5 * u(rng));
    const Vec3 omega(4.0 * u(rng), 4.0 * u(rng), 4.0 * u(rng));
    SimState state = init_from_velocity(mech, {start}, {vel}, {omega});

    std::vector<std::vector<BodyConfig>> traj_configs;
    traj_configs.push_back(state.z_prev);
    traj_configs.push_back(state.z_curr);
    Trajectory t = simulate(mech, state, nullptr, steps, cfg.opts);
    for (int k = 1; k <= steps; ++k) traj_configs.push_back(t.states[k].z_curr);

    if (noise_std > 0.0) {
      std::normal_distribution<double> gauss(0.0, noise_std);
      for (auto& cs : traj_configs) {
        for (auto& c : cs) {
          c.p += Vec3(gauss(rng), gauss(rng), gauss(rng));
          c.q =
              quat_mul(c.q, phi_map(Vec3(gauss(rng), gauss(rng), gauss(rng))));
        }
      }
    }
    configs[traj] = std::move(traj_configs);
  }

  Dataset dataset;
  for (int traj = 0; traj < n_traj; ++traj) {
    for (int k = 0; k + 2 < static_cast<int>(configs[traj].size()); ++k) {
      Triplet t;
      t.traj_id = traj;
      t.step = k;
      t.z_prev = configs[traj][k];
      t.z = configs[traj][k + 1];
      t.z_next = configs[traj][k + 2];
      dataset.push_back(std::move(t));
    }
  }
  return dataset;
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "traj_id,step";
  const int nb = dataset.empty() ? 1 : static_cast<int>(dataset[0].z.size());
  const char* names[3] = {"zprev", "z", "znext"};
  for (const char* n : names) {
    for (int i = 0; i < nb; ++i) {
      out << "," << n << i << "_px," << n << i << "_py," << n << i << "_pz,"
          << n << i << "_qs," << n << i << "_qx," << n << i << "_qy," << n << i
          << "_qz";
    }
  }
  out << "\n";
  char buf[32];
  auto fmt = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  for (const Triplet& t : dataset) {
    out << t.traj_id << "," << t.step;
    for (const auto* cs : {&t.z_prev, &t.z, &t.z_next}) {
      for (const BodyConfig& c : *cs) {
        out << "," << fmt(c.p.x()) << "," << fmt(c.p.y()) << ","
            << fmt(c.p.z()) << "," << fmt(c.q.s) << "," << fmt(c.q.v.x())
            << "," << fmt(c.q.v.y()) << "," << fmt(c.q.v.z());
      }
    }
    out << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path, int n_bodies) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  Dataset dataset;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    const size_t expected = 2 + 3 * 7 * static_cast<size_t>(n_bodies);
    if (vals.size() != expected) {
      throw std::runtime_error("dataset: malformed row in " + path);
    }
    Triplet t;
    t.traj_id = static_cast<int>(vals[0]);
    t.step = static_cast<int>(vals[1]);
    size_t k = 2;
    for (auto* cs : {&t.z_prev, &t.z, &t.z_next}) {
      cs->resize(n_bodies);
      for (int i = 0; i < n_bodies; ++i) {
        BodyConfig& c = (*cs)[i];
        c.p = Vec3(vals[k], vals[k + 1], vals[k + 2]);
        c.q = UnitQuaternion(vals[k + 3],
                             Vec3(vals[k + 4], vals[k + 5], vals[k + 6]));
        k += 7;
      }
    }
    dataset.push_back(std::move(t));
  }
  return dataset;
}

}  // namespace dojo
