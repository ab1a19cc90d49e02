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

// One-step contact dynamics as a cone-constrained NCP in the solver's
// canonical form. Decision variables are the next configuration (positions
// Euclidean, orientations as quaternion blocks), joint impulses, and the
// contact cone variables; problem data theta stacks the previous and current
// configurations, inputs, and the physical parameters.

#ifndef DOJO_NCP_HPP_
#define DOJO_NCP_HPP_

#include <vector>

#include "dojo/contact.hpp"
#include "dojo/dyn.hpp"
#include "dojo/ipsolver.hpp"
#include "dojo/mech.hpp"

namespace dojo {

// Column layout of the data Jacobian. Orientation entries are tangent-space
// (3 per quaternion); inertia entries use the symmetric basis
// (xx, xy, xz, yy, yz, zz) per body.
struct ThetaLayout {
  int n_bodies = 0;
  int n_contacts = 0;
  int zprev = 0;    // 6 per body
  int z = 0;        // 6 per body
  int u = 0;        // 6 per body (force then torque)
  int cf = 0;       // 1 per contact
  int offsets = 0;  // 3 per contact
  int mass = 0;     // 1 per body
  int inertia = 0;  // 6 per body
  int h = 0;        // 1
  int total = 0;

  static ThetaLayout make(int n_bodies, int n_contacts);
};

class NcpProblem : public IpmProblem {
 public:
  NcpProblem(const Mechanism& mech, std::vector<BodyConfig> z_prev,
             std::vector<BodyConfig> z, std::vector<BodyInput> u);

  const ConeLayout& cones() const override { return cone_layout_; }
  const ABlockLayout& a_layout() const override { return a_layout_; }
  const BlockStructure& structure() const override { return structure_; }
  VecX residual(const SolverPoint& w, double kappa) const override;
  void jacobian(const SolverPoint& w, BlockMatrix* out) const override;
  MatX data_jacobian(const SolverPoint& w) const override;
  // Only the physical-parameter columns (c_f, offsets, m, J, h); skips the
  // finite-differenced current-configuration block.
  MatX data_jacobian_params(const SolverPoint& w) const;
  int theta_dim() const override { return theta_.total; }

  const ThetaLayout& theta_layout() const { return theta_; }
  const Mechanism& mechanism() const { return mech_; }
  const std::vector<BodyConfig>& z_prev() const { return z_prev_; }
  const std::vector<BodyConfig>& z() const { return z_; }
  const std::vector<BodyInput>& inputs() const { return u_; }

  // Extrapolated next-configuration guess with unit cone variables.
  SolverPoint cold_start() const;

  std::vector<BodyConfig> extract_z_next(const SolverPoint& w) const;
  VecX extract_joint_impulses(const SolverPoint& w) const;
  std::vector<ContactVars> extract_contacts(const SolverPoint& w) const;

  int num_bodies() const { return static_cast<int>(mech_.bodies.size()); }
  int num_contacts() const { return static_cast<int>(mech_.contacts.size()); }

 private:
  struct JointData {
    int joint_index = 0;
    int l = 0;
    int row = 0;           // global row of the constraint block
    int col = 0;           // global tangent column of its impulse block
    int value_off = 0;     // value-space offset of the impulse block in a
    int node = -1;
    int parent_body = -1;  // body index or -1 for world
    int child_body = -1;
    MatX k_now;            // joint_jacobian at the current configuration
  };
  struct ContactData {
    int contact_index = 0;
    int eq_row = 0;        // global row of the equality block
    int n_eq = 0;
    int orthant_off = 0;
    int n_orthant = 0;
    int soc_off = -1;      // nonlinear mode
    int node = -1;
    int body = -1;
    SurfaceFrame frame;    // at the current configuration
    Mat3 torque_map;       // u_world -> 2 * offset x (Rᵀ u)
  };

  void accumulate_impulses(const SolverPoint& w, std::vector<Vec3>* lin,
                           std::vector<Vec3>* rot) const;
  MatX data_jacobian_impl(const SolverPoint& w, bool state_columns) const;
  BodyConfig config_next(const SolverPoint& w, int body) const;
  BodyConfig config_of(int body_id_or_world,
                       const std::vector<BodyConfig>& configs) const;
  // Columns of the world impulse mapping per cone variable of a contact.
  MatX contact_impulse_map(const ContactData& cd, ConeMode mode) const;

  Mechanism mech_;
  std::vector<BodyConfig> z_prev_, z_;
  std::vector<BodyInput> u_;

  std::vector<Vec3> psi_prev_;
  std::vector<JointData> joint_data_;
  std::vector<ContactData> contact_data_;
  std::vector<int> body_node_;

  ConeLayout cone_layout_;
  ABlockLayout a_layout_;
  BlockStructure structure_;
  ThetaLayout theta_;

  int n_a_tangent_ = 0;
  int n_a_value_ = 0;
  int impulse_dim_ = 0;
  int compl_row_base_ = 0;
};

NcpProblem assemble_ncp(const Mechanism& mech,
                        const std::vector<BodyConfig>& z_prev,
                        const std::vector<BodyConfig>& z,
                        const std::vector<BodyInput>& u);

}  // namespace dojo

#endif  // DOJO_NCP_HPP_
