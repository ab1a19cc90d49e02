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

#include "dojo/block_solver.hpp"

#include <stdexcept>

namespace dojo {

BlockStructure BlockStructure::single_node(int dim) {
  BlockStructure s;
  s.rows.resize(1);
  s.cols.resize(1);
  for (int i = 0; i < dim; ++i) {
    s.rows[0].push_back(i);
    s.cols[0].push_back(i);
  }
  s.order = {0};
  s.parent = {-1};
  s.tree = true;
  s.dim = dim;
  return s;
}

MatX& BlockMatrix::block(int row_node, int col_node) {
  auto key = std::make_pair(row_node, col_node);
  auto it = blocks_.find(key);
  if (it == blocks_.end()) {
    MatX zero = MatX::Zero(s_->rows[row_node].size(), s_->cols[col_node].size());
    it = blocks_.emplace(key, std::move(zero)).first;
  }
  return it->second;
}

const MatX* BlockMatrix::find(int row_node, int col_node) const {
  auto it = blocks_.find(std::make_pair(row_node, col_node));
  return it == blocks_.end() ? nullptr : &it->second;
}

void BlockMatrix::set_zero() {
  for (auto& [key, blk] : blocks_) blk.setZero();
}

MatX BlockMatrix::dense() const {
  MatX a = MatX::Zero(s_->dim, s_->dim);
  for (const auto& [key, blk] : blocks_) {
    const auto& rows = s_->rows[key.first];
    const auto& cols = s_->cols[key.second];
    for (int i = 0; i < blk.rows(); ++i) {
      for (int j = 0; j < blk.cols(); ++j) {
        a(rows[i], cols[j]) = blk(i, j);
      }
    }
  }
  return a;
}

bool BlockFactorization::factor(const BlockMatrix& a) {
  s_ = &a.structure();
  used_tree_ = false;
  if (s_->tree && factor_tree(a)) {
    used_tree_ = true;
    return true;
  }
  factor_dense(a);
  return dense_ok_;
}

bool BlockFactorization::factor_tree(const BlockMatrix& a) {
  const int n = s_->num_nodes();
  std::vector<MatX> diag(n);
  for (int v = 0; v < n; ++v) {
    const MatX* d = a.find(v, v);
    diag[v] = d ? *d : MatX::Zero(s_->rows[v].size(), s_->cols[v].size());
  }
  pivot_lu_.assign(n, Eigen::FullPivLU<MatX>());
  w_up_.assign(n, MatX());
  a_down_.assign(n, MatX());

  for (int v : s_->order) {
    Eigen::FullPivLU<MatX> lu(diag[v]);
    lu.setThreshold(kPivotTol);
    if (!lu.isInvertible()) return false;
    pivot_lu_[v] = lu;
    const int p = s_->parent[v];
    if (p >= 0) {
      const MatX* up = a.find(v, p);
      const MatX* down = a.find(p, v);
      w_up_[v] = up ? MatX(pivot_lu_[v].solve(*up))
                    : MatX(MatX::Zero(s_->rows[v].size(), s_->cols[p].size()));
      a_down_[v] = down ? *down
                        : MatX(MatX::Zero(s_->rows[p].size(), s_->cols[v].size()));
      if (up && down) diag[p] -= a_down_[v] * w_up_[v];
    }
  }
  return true;
}

void BlockFactorization::factor_dense(const BlockMatrix& a) {
  const MatX dense = a.dense();
  dense_qr_.compute(dense);
  dense_ok_ = dense_qr_.rank() == s_->dim;
  regularized_ = false;
  if (dense_ok_ || s_->dim == 0) return;
  // Rank-deficient systems (e.g. complementarity entries collapsing at a
  // stick transition) get a small Tikhonov shift; the corrector re-centers
  // the cone products afterwards.
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  for (double delta = 1e-12; delta <= 1e-4; delta *= 100.0) {
    MatX shifted = dense;
    shifted.diagonal().array() += delta * scale;
    dense_qr_.compute(shifted);
    if (dense_qr_.rank() == s_->dim) {
      dense_ok_ = true;
      regularized_ = true;
      return;
    }
  }
}

VecX BlockFactorization::solve(const VecX& rhs) const {
  if (!used_tree_) {
    if (!dense_ok_) throw std::runtime_error("block solver: singular system");
    return dense_qr_.solve(rhs);
  }
  const int n = s_->num_nodes();
  std::vector<VecX> y(n), z(n), x(n);
  for (int v = 0; v < n; ++v) {
    y[v].resize(s_->rows[v].size());
    for (size_t i = 0; i < s_->rows[v].size(); ++i) y[v](i) = rhs(s_->rows[v][i]);
  }
  for (int v : s_->order) {
    z[v] = pivot_lu_[v].solve(y[v]);
    const int p = s_->parent[v];
    if (p >= 0) y[p] -= a_down_[v] * z[v];
  }
  for (auto it = s_->order.rbegin(); it != s_->order.rend(); ++it) {
    const int v = *it;
    const int p = s_->parent[v];
    x[v] = p >= 0 ? VecX(z[v] - w_up_[v] * x[p]) : z[v];
  }
  VecX out(s_->dim);
  for (int v = 0; v < n; ++v) {
    for (size_t i = 0; i < s_->cols[v].size(); ++i) out(s_->cols[v][i]) = x[v](i);
  }
  return out;
}

MatX BlockFactorization::solve_multi_serial(const MatX& rhs) const {
  MatX out(rhs.rows(), rhs.cols());
  for (int c = 0; c < rhs.cols(); ++c) out.col(c) = solve(rhs.col(c));
  return out;
}

MatX BlockFactorization::solve_multi_parallel(const MatX& rhs) const {
  MatX out(rhs.rows(), rhs.cols());
#ifdef DOJO_HAS_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int c = 0; c < rhs.cols(); ++c) out.col(c) = solve(rhs.col(c));
  return out;
}

MatX BlockFactorization::solve_multi(const MatX& rhs, bool parallel) const {
  return parallel ? solve_multi_parallel(rhs) : solve_multi_serial(rhs);
}

}  // namespace dojo
