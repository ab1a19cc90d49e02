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

// Block-sparse LDU factorization over the mechanism graph. When the node
// graph is a tree, elimination in children-first order produces no fill-in
// outside parent diagonals and runs in linear time in the number of nodes.
// Loops or near-singular pivots fall back to a dense column-pivoted QR.

#ifndef DOJO_BLOCK_SOLVER_HPP_
#define DOJO_BLOCK_SOLVER_HPP_

#include <map>
#include <utility>
#include <vector>

#include "dojo/quat.hpp"

namespace dojo {

struct BlockStructure {
  // Per node, global row/column indices of its block (equal sizes).
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<int>> cols;
  std::vector<int> order;    // children-first elimination order
  std::vector<int> parent;   // -1 for roots
  bool tree = true;
  int dim = 0;               // total system dimension

  int num_nodes() const { return static_cast<int>(rows.size()); }
  static BlockStructure single_node(int dim);
};

class BlockMatrix {
 public:
  explicit BlockMatrix(const BlockStructure* structure) : s_(structure) {}

  MatX& block(int row_node, int col_node);
  const MatX* find(int row_node, int col_node) const;
  void set_zero();

  MatX dense() const;
  const BlockStructure& structure() const { return *s_; }

 private:
  const BlockStructure* s_;
  std::map<std::pair<int, int>, MatX> blocks_;
};

class BlockFactorization {
 public:
  // Tree LDU when possible, dense QR otherwise. Returns false only when the
  // dense fallback is rank deficient.
  bool factor(const BlockMatrix& a);

  VecX solve(const VecX& rhs) const;

  // Column-wise solve; columns are independent and run under OpenMP when
  // `parallel` is set. The serial path is the reference used by tests.
  MatX solve_multi_serial(const MatX& rhs) const;
  MatX solve_multi_parallel(const MatX& rhs) const;
  MatX solve_multi(const MatX& rhs, bool parallel) const;

  bool used_tree_path() const { return used_tree_; }
  bool regularized() const { return regularized_; }

 private:
  bool factor_tree(const BlockMatrix& a);
  void factor_dense(const BlockMatrix& a);

  const BlockStructure* s_ = nullptr;
  bool used_tree_ = false;
  bool dense_ok_ = false;
  bool regularized_ = false;
  // Tree path storage.
  std::vector<Eigen::FullPivLU<MatX>> pivot_lu_;
  std::vector<MatX> w_up_;      // pivot^{-1} * A[v][parent]
  std::vector<MatX> a_down_;    // A[parent][v]
  // Dense path storage.
  Eigen::ColPivHouseholderQR<MatX> dense_qr_;

  static constexpr double kPivotTol = 1e-12;
};

}  // namespace dojo

#endif  // DOJO_BLOCK_SOLVER_HPP_
