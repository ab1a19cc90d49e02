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

// Benchmarks the OpenMP kernels against their serial reference paths:
// multi-column sensitivity back-substitution and the batched sysid loss.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef DOJO_HAS_OPENMP
#include <omp.h>
#endif

#include "dojo/diff.hpp"
#include "dojo/models.hpp"
#include "dojo/sysid.hpp"

using namespace dojo;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
#ifdef DOJO_HAS_OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; parallel paths run serially\n");
#endif

  // Sensitivity back-substitution on a 5-link chain with 2 contacts.
  models::ChainParams params;
  params.links = 5;
  params.contacts_on_end_links = 2;
  params.gravity = Vec3(0.0, 0.0, -9.81);
  Mechanism mech = models::make_chain(params);
  std::vector<BodyConfig> configs = models::chain_rest_configs(params, 0.05);
  std::vector<Vec3> zero3(5, Vec3::Zero());
  SimState state = init_from_velocity(mech, configs, zero3, zero3);
  SolverOptions opts;

  const RelaxedStep rs = relaxed_step(mech, state, {}, 3e-4, opts);
  BlockMatrix rbar(&rs.problem->structure());
  rs.problem->jacobian(rs.solve.w, &rbar);
  BlockFactorization factor;
  if (!factor.factor(rbar)) {
    std::printf("factorization failed\n");
    return 1;
  }
  const MatX dbar = rs.problem->data_jacobian(rs.solve.w);

  const double t_serial =
      seconds([&] { factor.solve_multi_serial(-dbar); }, 50);
  const double t_parallel =
      seconds([&] { factor.solve_multi_parallel(-dbar); }, 50);
  const MatX a = factor.solve_multi_serial(-dbar);
  const MatX b = factor.solve_multi_parallel(-dbar);
  std::printf("sensitivity backsolve (%ld columns):\n", dbar.cols());
  std::printf("  serial   %.3f ms\n", 1e3 * t_serial);
  std::printf("  parallel %.3f ms (speedup %.2fx, max |diff| %.1e)\n",
              1e3 * t_parallel, t_serial / t_parallel,
              (a - b).cwiseAbs().maxCoeff());

  // Batched sysid loss over synthetic triplets.
  SysidConfig sc;
  SysidParams truth;
  truth.c_f = 0.4;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) {
        truth.vertices.emplace_back(sx * sc.half_extent, sy * sc.half_extent,
                                    sz * sc.half_extent);
      }
    }
  }
  const Dataset dataset = make_synthetic_dataset(truth, sc, 4, 7, 0.0, 40);
  std::printf("sysid loss batch (%zu triplets):\n", dataset.size());
  sc.parallel = false;
  const double loss_serial = sysid_loss(dataset, truth, sc);
  const double ts = seconds([&] { sysid_loss(dataset, truth, sc); }, 3);
  sc.parallel = true;
  const double loss_parallel = sysid_loss(dataset, truth, sc);
  const double tp = seconds([&] { sysid_loss(dataset, truth, sc); }, 3);
  std::printf("  serial   %.1f ms (loss %.3e)\n", 1e3 * ts, loss_serial);
  std::printf("  parallel %.1f ms (loss %.3e, speedup %.2fx, diff %.1e)\n",
              1e3 * tp, loss_parallel, ts / tp,
              std::abs(loss_serial - loss_parallel));
  return 0;
}
