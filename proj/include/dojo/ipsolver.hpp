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

// Primal-dual interior-point solver for cone-constrained nonlinear
// complementarity problems, Mehrotra-style predictor-corrector with an
// analytic cone line search and multiplicative updates for unit-quaternion
// decision variables.

#ifndef DOJO_IPSOLVER_HPP_
#define DOJO_IPSOLVER_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dojo/block_solver.hpp"
#include "dojo/quat.hpp"

namespace dojo {

// Cartesian product K = R^n_+ x Q^{l_1} x ... x Q^{l_j}.
struct ConeLayout {
  int orthant_dim = 0;
  std::vector<int> soc_dims;

  int total() const;
  int degree() const;  // orthant_dim + number of SOC blocks
  int num_blocks() const { return (orthant_dim > 0 ? 1 : 0) +
                                  static_cast<int>(soc_dims.size()); }
  // Offset of SOC block i within a cone-layout vector.
  int soc_offset(int i) const;
};

// Identity element e of the cone (ones on the orthant, (1,0,..) per SOC).
VecX cone_identity(const ConeLayout& layout);

// Blockwise cone product b∘c.
VecX cone_product(const ConeLayout& layout, const VecX& b, const VecX& c);

bool cone_interior(const ConeLayout& layout, const VecX& y);

// Projects y to the strict interior with the given margin.
VecX cone_project(const ConeLayout& layout, const VecX& y, double margin);

// Largest alpha in (0, 1] with y + alpha*d >= 0 for interior y > 0.
double alpha_orthant(const VecX& y, const VecX& d);

// Largest alpha in (0, 1] keeping y + alpha*d in the closed second-order
// cone, for strictly interior y.
double alpha_soc(const VecX& y, const VecX& d);

// Decision variable w = (a, b, c). `a` is stored in value space (quaternion
// blocks hold 4 components); b and c follow the cone layout.
struct ABlock {
  bool is_quaternion = false;
  int size = 0;          // value-space size (4 for quaternions)
  int value_offset = 0;
  int tangent_offset = 0;
};

struct ABlockLayout {
  std::vector<ABlock> blocks;
  int value_dim = 0;
  int tangent_dim = 0;

  void add_euclidean(int n);
  void add_quaternion();
};

struct SolverPoint {
  VecX a;
  VecX b;
  VecX c;
};

// Problem instance in the solver's canonical form: find w with
// E(a,b,c;theta)=0, b∘c = kappa e, b,c in K. The residual stacks the
// equality block followed by the complementarity block.
class IpmProblem {
 public:
  virtual ~IpmProblem() = default;

  virtual const ConeLayout& cones() const = 0;
  virtual const ABlockLayout& a_layout() const = 0;
  virtual const BlockStructure& structure() const = 0;

  // Full residual, size tangent_dim + 2*cone_total.
  virtual VecX residual(const SolverPoint& w, double kappa) const = 0;

  // Tangent-space Jacobian of the residual (quaternion columns are 3-wide).
  virtual void jacobian(const SolverPoint& w, BlockMatrix* out) const = 0;

  // Jacobian of the residual with respect to problem data; optional.
  virtual MatX data_jacobian(const SolverPoint& w) const;
  virtual int theta_dim() const { return 0; }

  int equality_dim() const { return a_layout().tangent_dim + cones().total(); }
  int residual_dim() const { return a_layout().tangent_dim + 2 * cones().total(); }
  int tangent_dim() const { return a_layout().tangent_dim + 2 * cones().total(); }
};

// Appends the complementarity rows b∘c - kappa e; shared by problem
// implementations assembling their residuals.
void append_complementarity(const ConeLayout& layout, const VecX& b,
                            const VecX& c, double kappa,
                            Eigen::Ref<VecX> out);

// d(b∘c)/db for one SOC block is the arrow matrix of c (and vice versa).
MatX soc_arrow(const VecX& u);

struct SolverOptions {
  double r_tol = 1e-5;
  double kappa_tol = 1e-5;
  double tau_soc_max = 0.99;
  double tau_min = 0.95;
  double beta_ls = 0.5;
  int max_iterations = 100;
  int max_linesearch = 25;
  double interior_margin = 0.1;
  // Records the first iterate whose complementarity violation drops below
  // this value (0 disables); used for smooth gradients.
  double kappa_grad_cache = 0.0;
  bool compute_sensitivity = false;
  bool parallel_sensitivity = true;
  // Test hook called after every accepted iterate.
  std::function<void(int iteration, const SolverPoint& w, double r_vio,
                     double kappa_vio, double alpha)> observer;
};

enum class SolveStatus { kConverged, kMaxIterations, kLineSearchFail, kSingular };

const char* to_string(SolveStatus status);

struct SolveResult {
  SolverPoint w;
  SolveStatus status = SolveStatus::kMaxIterations;
  int iterations = 0;
  double r_vio = 0.0;
  double kappa_vio = 0.0;
  double kappa_final = 0.0;
  std::shared_ptr<BlockFactorization> factorization;
  std::optional<MatX> sensitivity;  // -Rbar^{-1} Dbar at the final point
  std::optional<SolverPoint> kappa_grad_point;
};

// Minimum over all cone blocks of the fraction-to-boundary step length,
// tau_ort on orthant blocks and tau_soc on second-order blocks.
double cone_search(const ConeLayout& layout, const SolverPoint& w,
                   const VecX& delta_b, const VecX& delta_c, double tau_ort,
                   double tau_soc);

// (r_vio, kappa_vio): equality-row infinity norm and the largest blockwise
// complementarity product norm.
std::pair<double, double> violations(const IpmProblem& problem,
                                     const SolverPoint& w);

// Centering parameters (mu, sigma) from the affine probe step.
std::pair<double, double> centering(const ConeLayout& layout, const VecX& b,
                                    const VecX& c, double alpha_aff,
                                    const VecX& delta_b_aff,
                                    const VecX& delta_c_aff);

// w + alpha*delta with multiplicative updates on quaternion blocks.
SolverPoint candidate_update(const ABlockLayout& layout, const SolverPoint& w,
                             const VecX& delta, double alpha);

SolveResult solve(const IpmProblem& problem, const SolverPoint& w0,
                  const SolverOptions& opts);

// Newton iteration on r(w; theta, kappa_fixed) = 0 with a cone-feasibility
// line search; converges to the central-path point at fixed relaxation.
SolveResult solve_relaxed(const IpmProblem& problem, const SolverPoint& w0,
                          const SolverOptions& opts, double kappa_fixed,
                          double tol = 1e-11);

}  // namespace dojo

#endif  // DOJO_IPSOLVER_HPP_
