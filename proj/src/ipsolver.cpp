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

#include "dojo/ipsolver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dojo {

int ConeLayout::total() const {
  int t = orthant_dim;
  for (int l : soc_dims) t += l;
  return t;
}

int ConeLayout::degree() const {
  return orthant_dim + static_cast<int>(soc_dims.size());
}

int ConeLayout::soc_offset(int i) const {
  int off = orthant_dim;
  for (int k = 0; k < i; ++k) off += soc_dims[k];
  return off;
}

VecX cone_identity(const ConeLayout& layout) {
  VecX e = VecX::Zero(layout.total());
  e.head(layout.orthant_dim).setOnes();
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    e(layout.soc_offset(static_cast<int>(i))) = 1.0;
  }
  return e;
}

VecX cone_product(const ConeLayout& layout, const VecX& b, const VecX& c) {
  VecX out(layout.total());
  out.head(layout.orthant_dim) =
      b.head(layout.orthant_dim).cwiseProduct(c.head(layout.orthant_dim));
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offset(static_cast<int>(i));
    const int l = layout.soc_dims[i];
    const VecX bi = b.segment(off, l);
    const VecX ci = c.segment(off, l);
    out(off) = bi.dot(ci);
    out.segment(off + 1, l - 1) =
        bi(0) * ci.tail(l - 1) + ci(0) * bi.tail(l - 1);
  }
  return out;
}

bool cone_interior(const ConeLayout& layout, const VecX& y) {
  if ((y.head(layout.orthant_dim).array() <= 0.0).any()) return false;
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offset(static_cast<int>(i));
    const int l = layout.soc_dims[i];
    if (y(off) <= y.segment(off + 1, l - 1).norm()) return false;
  }
  return true;
}

VecX cone_project(const ConeLayout& layout, const VecX& y, double margin) {
  VecX out = y;
  out.head(layout.orthant_dim) =
      out.head(layout.orthant_dim).cwiseMax(margin);
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offset(static_cast<int>(i));
    const int l = layout.soc_dims[i];
    const double tail = out.segment(off + 1, l - 1).norm();
    out(off) = std::max(out(off), tail + margin);
  }
  return out;
}

double alpha_orthant(const VecX& y, const VecX& d) {
  double alpha = 1.0;
  for (int k = 0; k < y.size(); ++k) {
    if (d(k) < 0.0) alpha = std::min(alpha, -y(k) / d(k));
  }
  return alpha;
}

double alpha_soc(const VecX& y, const VecX& d) {
  const int l = static_cast<int>(y.size());
  const VecX yt = y.tail(l - 1);
  const VecX dt = d.tail(l - 1);
  const double nu = y(0) * y(0) - yt.squaredNorm();
  const double zeta = y(0) * d(0) - yt.dot(dt);
  const double sqrt_nu = std::sqrt(nu);
  const double rho1 = zeta / nu;
  const VecX rho_tail =
      dt / sqrt_nu - (zeta / sqrt_nu + d(0)) / (y(0) * sqrt_nu + nu) * yt;
  const double tail_norm = rho_tail.norm();
  if (tail_norm > rho1) return std::min(1.0, 1.0 / (tail_norm - rho1));
  return 1.0;
}

void ABlockLayout::add_euclidean(int n) {
  if (n <= 0) return;
  // Merge adjacent Euclidean blocks.
  if (!blocks.empty() && !blocks.back().is_quaternion) {
    blocks.back().size += n;
  } else {
    blocks.push_back({false, n, value_dim, tangent_dim});
  }
  value_dim += n;
  tangent_dim += n;
}

void ABlockLayout::add_quaternion() {
  blocks.push_back({true, 4, value_dim, tangent_dim});
  value_dim += 4;
  tangent_dim += 3;
}

MatX IpmProblem::data_jacobian(const SolverPoint&) const {
  throw std::logic_error("data_jacobian not implemented for this problem");
}

void append_complementarity(const ConeLayout& layout, const VecX& b,
                            const VecX& c, double kappa,
                            Eigen::Ref<VecX> out) {
  out = cone_product(layout, b, c) - kappa * cone_identity(layout);
}

MatX soc_arrow(const VecX& u) {
  const int l = static_cast<int>(u.size());
  MatX m = MatX::Zero(l, l);
  m(0, 0) = u(0);
  m.block(0, 1, 1, l - 1) = u.tail(l - 1).transpose();
  m.block(1, 0, l - 1, 1) = u.tail(l - 1);
  m.block(1, 1, l - 1, l - 1) = u(0) * MatX::Identity(l - 1, l - 1);
  return m;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max_iterations";
    case SolveStatus::kLineSearchFail: return "linesearch_fail";
    case SolveStatus::kSingular: return "singular";
  }
  return "unknown";
}

double cone_search(const ConeLayout& layout, const SolverPoint& w,
                   const VecX& delta_b, const VecX& delta_c, double tau_ort,
                   double tau_soc) {
  double alpha = 1.0;
  if (layout.orthant_dim > 0) {
    const auto head = [&](const VecX& v) { return v.head(layout.orthant_dim); };
    alpha = std::min(alpha, tau_ort * alpha_orthant(head(w.b), head(delta_b)));
    alpha = std::min(alpha, tau_ort * alpha_orthant(head(w.c), head(delta_c)));
  }
  for (size_t i = 0; i < layout.soc_dims.size(); ++i) {
    const int off = layout.soc_offset(static_cast<int>(i));
    const int l = layout.soc_dims[i];
    alpha = std::min(alpha, tau_soc * alpha_soc(w.b.segment(off, l),
                                                delta_b.segment(off, l)));
    alpha = std::min(alpha, tau_soc * alpha_soc(w.c.segment(off, l),
                                                delta_c.segment(off, l)));
  }
  return alpha;
}

std::pair<double, double> violations(const IpmProblem& problem,
                                     const SolverPoint& w) {
  const VecX r = problem.residual(w, 0.0);
  const int n_eq = problem.equality_dim();
  const double r_vio =
      n_eq > 0 ? r.head(n_eq).cwiseAbs().maxCoeff() : 0.0;
  const ConeLayout& layout = problem.cones();
  double kappa_vio = 0.0;
  if (layout.total() > 0) {
    const VecX prod = cone_product(layout, w.b, w.c);
    kappa_vio = prod.cwiseAbs().maxCoeff();
  }
  return {r_vio, kappa_vio};
}

std::pair<double, double> centering(const ConeLayout& layout, const VecX& b,
                                    const VecX& c, double alpha_aff,
                                    const VecX& delta_b_aff,
                                    const VecX& delta_c_aff) {
  const int deg = layout.degree();
  if (deg == 0) return {0.0, 0.0};
  const double mu = b.dot(c) / deg;
  if (mu == 0.0) return {0.0, 0.0};
  const double mu_aff = (b + alpha_aff * delta_b_aff)
                            .dot(c + alpha_aff * delta_c_aff) / deg;
  const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
  return {mu, ratio * ratio * ratio};
}

SolverPoint candidate_update(const ABlockLayout& layout, const SolverPoint& w,
                             const VecX& delta, double alpha) {
  SolverPoint out = w;
  for (const ABlock& blk : layout.blocks) {
    if (blk.is_quaternion) {
      const UnitQuaternion q =
          UnitQuaternion::from_vec4(w.a.segment<4>(blk.value_offset));
      const Vec3 step = alpha * delta.segment<3>(blk.tangent_offset);
      out.a.segment<4>(blk.value_offset) = quat_mul(q, phi_map(step)).vec4();
    } else {
      out.a.segment(blk.value_offset, blk.size) +=
          alpha * delta.segment(blk.tangent_offset, blk.size);
    }
  }
  const int nt = layout.tangent_dim;
  const int nk = static_cast<int>(w.b.size());
  out.b += alpha * delta.segment(nt, nk);
  out.c += alpha * delta.segment(nt + nk, nk);
  return out;
}

namespace {

// Shrinks alpha so every quaternion tangent step stays inside the phi_map
// chart.
double cap_quaternion_alpha(const ABlockLayout& layout, const VecX& delta,
                            double alpha) {
  for (const ABlock& blk : layout.blocks) {
    if (!blk.is_quaternion) continue;
    const double n = delta.segment<3>(blk.tangent_offset).norm();
    if (alpha * n >= 0.99) alpha = 0.99 / n;
  }
  return alpha;
}

struct ConeDelta {
  VecX b;
  VecX c;
};

ConeDelta split_cone_delta(const IpmProblem& problem, const VecX& delta) {
  const int nt = problem.a_layout().tangent_dim;
  const int nk = problem.cones().total();
  return {delta.segment(nt, nk), delta.segment(nt + nk, nk)};
}

}  // namespace

SolveResult solve(const IpmProblem& problem, const SolverPoint& w0,
                  const SolverOptions& opts) {
  const ConeLayout& cones = problem.cones();
  const ABlockLayout& ablocks = problem.a_layout();
  const int nk = cones.total();

  SolveResult result;
  result.w = w0;
  result.w.b = cone_project(cones, w0.b, opts.interior_margin);
  result.w.c = cone_project(cones, w0.c, opts.interior_margin);

  auto [r_vio, kappa_vio] = violations(problem, result.w);
  result.r_vio = r_vio;
  result.kappa_vio = kappa_vio;

  BlockMatrix rbar(&problem.structure());
  auto factor = std::make_shared<BlockFactorization>();

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    if (result.r_vio < opts.r_tol && result.kappa_vio < opts.kappa_tol) {
      result.status = SolveStatus::kConverged;
      break;
    }

    rbar.set_zero();
    problem.jacobian(result.w, &rbar);
    if (!factor->factor(rbar)) {
      result.status = SolveStatus::kSingular;
      break;
    }

    // Predictor: affine direction aiming at zero complementarity.
    const VecX aff = factor->solve(-problem.residual(result.w, 0.0));
    const ConeDelta aff_bc = split_cone_delta(problem, aff);
    const double alpha_aff =
        cone_search(cones, result.w, aff_bc.b, aff_bc.c, 1.0, 1.0);
    const auto [mu, sigma] = centering(cones, result.w.b, result.w.c, alpha_aff,
                                       aff_bc.b, aff_bc.c);
    const double kappa = std::max(sigma * mu, opts.kappa_tol / 5.0);

    // Corrector toward the relaxed target, same factorization.
    const VecX delta = factor->solve(-problem.residual(result.w, kappa));
    const ConeDelta bc = split_cone_delta(problem, delta);
    const double tau_ort =
        std::max(opts.tau_min,
                 1.0 - std::pow(std::max(result.r_vio, result.kappa_vio), 2));
    const double tau_soc = std::min(opts.tau_soc_max, tau_ort);
    double alpha = cone_search(cones, result.w, bc.b, bc.c, tau_ort, tau_soc);
    alpha = cap_quaternion_alpha(ablocks, delta, alpha);

    // Backtrack until either violation decreases.
    const double prev_r = result.r_vio;
    const double prev_kappa = result.kappa_vio;
    SolverPoint cand;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_linesearch; ++ls) {
      cand = candidate_update(ablocks, result.w, delta, alpha);
      try {
        auto [cr, ck] = violations(problem, cand);
        // With no cone variables the complementarity metric is vacuous and
        // acceptance must come from the constraint violation alone.
        if (cr <= prev_r || (nk > 0 && ck <= prev_kappa)) {
          result.w = cand;
          result.r_vio = cr;
          result.kappa_vio = ck;
          accepted = true;
          break;
        }
      } catch (const std::domain_error&) {
        // Candidate left the quaternion chart; shrink the step.
      }
      alpha *= opts.beta_ls;
    }
    if (!accepted) {
      result.status = SolveStatus::kLineSearchFail;
      break;
    }
    if (opts.kappa_grad_cache > 0.0 && !result.kappa_grad_point &&
        result.kappa_vio < opts.kappa_grad_cache) {
      result.kappa_grad_point = result.w;
    }
    if (opts.observer) {
      opts.observer(iter, result.w, result.r_vio, result.kappa_vio, alpha);
    }
  }
  if (iter == opts.max_iterations) result.status = SolveStatus::kMaxIterations;
  if (result.status == SolveStatus::kConverged &&
      opts.kappa_grad_cache > 0.0 && !result.kappa_grad_point) {
    // Convergence can land below the cache target within a single step.
    if (result.kappa_vio < opts.kappa_grad_cache) {
      result.kappa_grad_point = result.w;
    }
  }

  result.iterations = iter;
  result.kappa_final = result.kappa_vio;
  result.factorization = factor;

  if (result.status == SolveStatus::kConverged && opts.compute_sensitivity &&
      problem.theta_dim() > 0) {
    rbar.set_zero();
    problem.jacobian(result.w, &rbar);
    if (factor->factor(rbar)) {
      result.sensitivity = factor->solve_multi(
          -problem.data_jacobian(result.w), opts.parallel_sensitivity);
    }
  }
  return result;
}

SolveResult solve_relaxed(const IpmProblem& problem, const SolverPoint& w0,
                          const SolverOptions& opts, double kappa_fixed,
                          double tol) {
  const ConeLayout& cones = problem.cones();
  const ABlockLayout& ablocks = problem.a_layout();

  SolveResult result;
  result.w = w0;
  if (!cone_interior(cones, result.w.b) || !cone_interior(cones, result.w.c)) {
    result.w.b = cone_project(cones, w0.b, opts.interior_margin);
    result.w.c = cone_project(cones, w0.c, opts.interior_margin);
  }

  BlockMatrix rbar(&problem.structure());
  auto factor = std::make_shared<BlockFactorization>();

  VecX r = problem.residual(result.w, kappa_fixed);
  double rnorm = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
  int iter = 0;
  result.status = SolveStatus::kMaxIterations;
  for (; iter < opts.max_iterations; ++iter) {
    if (rnorm < tol) {
      result.status = SolveStatus::kConverged;
      break;
    }
    rbar.set_zero();
    problem.jacobian(result.w, &rbar);
    if (!factor->factor(rbar)) {
      result.status = SolveStatus::kSingular;
      break;
    }
    const VecX delta = factor->solve(-r);
    const ConeDelta bc = split_cone_delta(problem, delta);
    double alpha = cone_search(cones, result.w, bc.b, bc.c, 0.99, 0.99);
    alpha = cap_quaternion_alpha(ablocks, delta, alpha);

    bool accepted = false;
    for (int ls = 0; ls < opts.max_linesearch; ++ls) {
      SolverPoint cand = candidate_update(ablocks, result.w, delta, alpha);
      try {
        VecX rc = problem.residual(cand, kappa_fixed);
        const double rcnorm = rc.cwiseAbs().maxCoeff();
        if (rcnorm < rnorm) {
          result.w = cand;
          r = std::move(rc);
          rnorm = rcnorm;
          accepted = true;
          break;
        }
      } catch (const std::domain_error&) {
      }
      alpha *= opts.beta_ls;
    }
    if (!accepted) {
      result.status = SolveStatus::kLineSearchFail;
      break;
    }
  }
  auto [rv, kv] = violations(problem, result.w);
  result.r_vio = rv;
  result.kappa_vio = kv;
  result.kappa_final = kappa_fixed;
  result.iterations = iter;
  result.factorization = factor;
  return result;
}

}  // namespace dojo
