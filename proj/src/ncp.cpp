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

#include "dojo/ncp.hpp"

#include <stdexcept>
#include <utility>

namespace dojo {

namespace {

// Symmetric inertia basis in (xx, xy, xz, yy, yz, zz) order.
Mat3 sym_basis(int k) {
  Mat3 s = Mat3::Zero();
  switch (k) {
    case 0: s(0, 0) = 1.0; break;
    case 1: s(0, 1) = s(1, 0) = 1.0; break;
    case 2: s(0, 2) = s(2, 0) = 1.0; break;
    case 3: s(1, 1) = 1.0; break;
    case 4: s(1, 2) = s(2, 1) = 1.0; break;
    case 5: s(2, 2) = 1.0; break;
  }
  return s;
}

constexpr double kFdStep = 1e-6;

}  // namespace

ThetaLayout ThetaLayout::make(int n_bodies, int n_contacts) {
  ThetaLayout t;
  t.n_bodies = n_bodies;
  t.n_contacts = n_contacts;
  int off = 0;
  t.zprev = off; off += 6 * n_bodies;
  t.z = off; off += 6 * n_bodies;
  t.u = off; off += 6 * n_bodies;
  t.cf = off; off += n_contacts;
  t.offsets = off; off += 3 * n_contacts;
  t.mass = off; off += n_bodies;
  t.inertia = off; off += 6 * n_bodies;
  t.h = off; off += 1;
  t.total = off;
  return t;
}

NcpProblem::NcpProblem(const Mechanism& mech, std::vector<BodyConfig> z_prev,
                       std::vector<BodyConfig> z, std::vector<BodyInput> u)
    : mech_(mech),
      z_prev_(std::move(z_prev)),
      z_(std::move(z)),
      u_(std::move(u)) {
  const int n_bodies = num_bodies();
  if (static_cast<int>(z_prev_.size()) != n_bodies ||
      static_cast<int>(z_.size()) != n_bodies) {
    throw std::invalid_argument("ncp: state size does not match mechanism");
  }
  if (u_.empty()) u_.resize(n_bodies);
  if (static_cast<int>(u_.size()) != n_bodies) {
    throw std::invalid_argument("ncp: input size does not match mechanism");
  }

  psi_prev_.resize(n_bodies);
  for (int i = 0; i < n_bodies; ++i) {
    psi_prev_[i] = psi_from_configs(z_prev_[i].q, z_[i].q);
  }

  for (int i = 0; i < n_bodies; ++i) {
    a_layout_.add_euclidean(3);
    a_layout_.add_quaternion();
  }

  // Joint impulse blocks.
  int impulse_off = 0;
  for (size_t m = 0; m < mech_.joints.size(); ++m) {
    const Joint& joint = mech_.joints[m];
    const int l = joint_constraint_dim(joint.kind);
    if (l == 0) continue;
    JointData jd;
    jd.joint_index = static_cast<int>(m);
    jd.l = l;
    jd.row = 6 * n_bodies + impulse_off;
    jd.col = 6 * n_bodies + impulse_off;
    jd.value_off = 7 * n_bodies + impulse_off;
    jd.parent_body =
        joint.parent == kWorldId ? -1 : mech_.body_index(joint.parent);
    jd.child_body = mech_.body_index(joint.child);
    jd.k_now = joint_jacobian(joint, config_of(joint.parent, z_),
                              config_of(joint.child, z_));
    joint_data_.push_back(std::move(jd));
    impulse_off += l;
  }
  impulse_dim_ = impulse_off;
  a_layout_.add_euclidean(impulse_dim_);
  n_a_tangent_ = a_layout_.tangent_dim;
  n_a_value_ = a_layout_.value_dim;

  // Cone layout: orthant entries first, then one 3-dim SOC per nonlinear
  // contact.
  int orthant = 0;
  contact_data_.resize(mech_.contacts.size());
  for (size_t c = 0; c < mech_.contacts.size(); ++c) {
    ContactData& cd = contact_data_[c];
    cd.contact_index = static_cast<int>(c);
    cd.body = mech_.body_index(mech_.contacts[c].body);
    cd.orthant_off = orthant;
    cd.n_orthant = mech_.contacts[c].cone_mode == ConeMode::kNonlinear ? 1 : 6;
    orthant += cd.n_orthant;
  }
  cone_layout_.orthant_dim = orthant;
  int soc_off = orthant;
  for (size_t c = 0; c < mech_.contacts.size(); ++c) {
    if (mech_.contacts[c].cone_mode != ConeMode::kNonlinear) continue;
    contact_data_[c].soc_off = soc_off;
    cone_layout_.soc_dims.push_back(3);
    soc_off += 3;
  }

  // Contact equality rows and cached current-configuration data.
  int eq = 6 * n_bodies + impulse_dim_;
  for (size_t c = 0; c < mech_.contacts.size(); ++c) {
    ContactData& cd = contact_data_[c];
    const ContactSpec& spec = mech_.contacts[c];
    cd.eq_row = eq;
    cd.n_eq = spec.cone_mode == ConeMode::kNonlinear ? 4 : 6;
    eq += cd.n_eq;
    cd.frame = surface_frame(spec, z_[cd.body]);
    cd.torque_map =
        2.0 * skew(spec.offset) * rotation_matrix(z_[cd.body].q).transpose();
  }
  compl_row_base_ = eq;

  theta_ = ThetaLayout::make(n_bodies, num_contacts());

  // Graph structure for the block solver.
  body_node_.assign(n_bodies, -1);
  std::vector<int> joint_node(mech_.joints.size(), -1);
  std::vector<int> contact_node(mech_.contacts.size(), -1);
  for (size_t n = 0; n < mech_.nodes.size(); ++n) {
    const GraphNode& node = mech_.nodes[n];
    if (node.kind == GraphNode::kBody) body_node_[node.index] = static_cast<int>(n);
    if (node.kind == GraphNode::kJoint) joint_node[node.index] = static_cast<int>(n);
    if (node.kind == GraphNode::kContact) contact_node[node.index] = static_cast<int>(n);
  }
  for (JointData& jd : joint_data_) jd.node = joint_node[jd.joint_index];
  for (ContactData& cd : contact_data_) cd.node = contact_node[cd.contact_index];

  const int n_k = cone_layout_.total();
  const int b_col = n_a_tangent_;
  const int c_col = n_a_tangent_ + n_k;
  structure_.rows.resize(mech_.nodes.size());
  structure_.cols.resize(mech_.nodes.size());
  structure_.order = mech_.elimination_order;
  structure_.parent = mech_.node_parent;
  structure_.tree = mech_.is_tree;
  structure_.dim = tangent_dim();
  for (int i = 0; i < n_bodies; ++i) {
    for (int k = 0; k < 6; ++k) {
      structure_.rows[body_node_[i]].push_back(6 * i + k);
      structure_.cols[body_node_[i]].push_back(6 * i + k);
    }
  }
  for (const JointData& jd : joint_data_) {
    for (int k = 0; k < jd.l; ++k) {
      structure_.rows[jd.node].push_back(jd.row + k);
      structure_.cols[jd.node].push_back(jd.col + k);
    }
  }
  for (const ContactData& cd : contact_data_) {
    auto& rows = structure_.rows[cd.node];
    auto& cols = structure_.cols[cd.node];
    for (int k = 0; k < cd.n_eq; ++k) rows.push_back(cd.eq_row + k);
    for (int k = 0; k < cd.n_orthant; ++k) {
      rows.push_back(compl_row_base_ + cd.orthant_off + k);
    }
    if (cd.soc_off >= 0) {
      for (int k = 0; k < 3; ++k) rows.push_back(compl_row_base_ + cd.soc_off + k);
    }
    for (int k = 0; k < cd.n_orthant; ++k) cols.push_back(b_col + cd.orthant_off + k);
    if (cd.soc_off >= 0) {
      for (int k = 0; k < 3; ++k) cols.push_back(b_col + cd.soc_off + k);
    }
    for (int k = 0; k < cd.n_orthant; ++k) cols.push_back(c_col + cd.orthant_off + k);
    if (cd.soc_off >= 0) {
      for (int k = 0; k < 3; ++k) cols.push_back(c_col + cd.soc_off + k);
    }
  }
}

BodyConfig NcpProblem::config_of(int body_id_or_world,
                                 const std::vector<BodyConfig>& configs) const {
  if (body_id_or_world == kWorldId) return BodyConfig{};
  return configs[mech_.body_index(body_id_or_world)];
}

BodyConfig NcpProblem::config_next(const SolverPoint& w, int body) const {
  BodyConfig next;
  next.p = w.a.segment<3>(7 * body);
  next.q = UnitQuaternion::from_vec4(w.a.segment<4>(7 * body + 3));
  return next;
}

MatX NcpProblem::contact_impulse_map(const ContactData& cd,
                                     ConeMode mode) const {
  const int nb = mode == ConeMode::kNonlinear ? 4 : 6;
  MatX m = MatX::Zero(3, nb);
  m.col(0) = cd.frame.n;
  if (mode == ConeMode::kNonlinear) {
    m.col(2) = cd.frame.t1;
    m.col(3) = cd.frame.t2;
  } else {
    m.col(1) = cd.frame.t1;
    m.col(2) = cd.frame.t2;
    m.col(3) = -cd.frame.t1;
    m.col(4) = -cd.frame.t2;
  }
  return m;
}

void NcpProblem::accumulate_impulses(const SolverPoint& w,
                                     std::vector<Vec3>* lin,
                                     std::vector<Vec3>* rot) const {
  const double h = mech_.timestep;
  for (const JointData& jd : joint_data_) {
    const VecX j = w.a.segment(jd.value_off, jd.l);
    if (jd.parent_body >= 0) {
      (*lin)[jd.parent_body] += jd.k_now.block(0, 0, jd.l, 3).transpose() * j;
      (*rot)[jd.parent_body] +=
          0.25 * h * jd.k_now.block(0, 3, jd.l, 3).transpose() * j;
    }
    (*lin)[jd.child_body] += jd.k_now.block(0, 6, jd.l, 3).transpose() * j;
    (*rot)[jd.child_body] +=
        0.25 * h * jd.k_now.block(0, 9, jd.l, 3).transpose() * j;
  }
  for (const ContactData& cd : contact_data_) {
    const ContactSpec& spec = mech_.contacts[cd.contact_index];
    const double gamma = w.b(cd.orthant_off);
    VecX beta;
    if (spec.cone_mode == ConeMode::kNonlinear) {
      beta = w.b.segment(cd.soc_off, 3);
    } else {
      beta = w.b.segment(cd.orthant_off + 1, 4);
    }
    const Vec2 fb = friction_from_beta(spec.cone_mode, beta);
    const Vec3 impulse =
        gamma * cd.frame.n + fb(0) * cd.frame.t1 + fb(1) * cd.frame.t2;
    (*lin)[cd.body] += impulse;
    (*rot)[cd.body] += 0.25 * h * cd.torque_map * impulse;
  }
}

VecX NcpProblem::residual(const SolverPoint& w, double kappa) const {
  const int n_bodies = num_bodies();
  const double h = mech_.timestep;
  VecX r = VecX::Zero(residual_dim());

  std::vector<Vec3> lin(n_bodies, Vec3::Zero()), rot(n_bodies, Vec3::Zero());
  accumulate_impulses(w, &lin, &rot);

  for (int i = 0; i < n_bodies; ++i) {
    const Body& body = mech_.bodies[i];
    const BodyConfig next = config_next(w, i);
    const Vec3 psi_next = psi_from_configs(z_[i].q, next.q);
    r.segment<3>(6 * i) =
        linear_residual(body, z_prev_[i].p, z_[i].p, next.p, mech_.gravity, h,
                        lin[i], u_[i].f);
    r.segment<3>(6 * i + 3) =
        rotational_residual(body, psi_prev_[i], psi_next, rot[i], u_[i].tau, h);
  }

  for (const JointData& jd : joint_data_) {
    const Joint& joint = mech_.joints[jd.joint_index];
    BodyConfig xa = joint.parent == kWorldId ? BodyConfig{}
                                             : config_next(w, jd.parent_body);
    BodyConfig xb = config_next(w, jd.child_body);
    r.segment(jd.row, jd.l) = joint_residual(joint, xa, xb);
  }

  for (const ContactData& cd : contact_data_) {
    const ContactSpec& spec = mech_.contacts[cd.contact_index];
    const BodyConfig next = config_next(w, cd.body);
    const double phi = signed_distance(spec, next);
    const Vec2 v = tangential_velocity(spec, z_[cd.body], next, h, cd.frame);
    const double gamma = w.b(cd.orthant_off);
    if (spec.cone_mode == ConeMode::kNonlinear) {
      const VecX beta = w.b.segment(cd.soc_off, 3);
      const VecX eta = w.c.segment(cd.soc_off, 3);
      r(cd.eq_row) = w.c(cd.orthant_off) - phi;
      r.segment<2>(cd.eq_row + 1) = v - eta.tail<2>();
      r(cd.eq_row + 3) = beta(0) - spec.friction * gamma;
    } else {
      const VecX beta = w.b.segment(cd.orthant_off + 1, 4);
      const double psi_dual = w.b(cd.orthant_off + 5);
      const VecX eta = w.c.segment(cd.orthant_off + 1, 4);
      const double s_psi = w.c(cd.orthant_off + 5);
      r(cd.eq_row) = w.c(cd.orthant_off) - phi;
      r(cd.eq_row + 1) = v(0) + psi_dual - eta(0);
      r(cd.eq_row + 2) = v(1) + psi_dual - eta(1);
      r(cd.eq_row + 3) = -v(0) + psi_dual - eta(2);
      r(cd.eq_row + 4) = -v(1) + psi_dual - eta(3);
      r(cd.eq_row + 5) = s_psi - (spec.friction * gamma - beta.sum());
    }
  }

  const int n_k = cone_layout_.total();
  if (n_k > 0) {
    append_complementarity(cone_layout_, w.b, w.c, kappa,
                           r.segment(compl_row_base_, n_k));
  }
  return r;
}

void NcpProblem::jacobian(const SolverPoint& w, BlockMatrix* out) const {
  const int n_bodies = num_bodies();
  const double h = mech_.timestep;

  for (int i = 0; i < n_bodies; ++i) {
    MatX& blk = out->block(body_node_[i], body_node_[i]);
    blk.block<3, 3>(0, 0) += mech_.bodies[i].m / h * Mat3::Identity();
    const BodyConfig next = config_next(w, i);
    const UnitQuaternion rel = quat_mul(z_[i].q.conjugate(), next.q);
    const Mat3 dpsi = vmat() * lmat(rel) * hmat();
    const Vec3 psi_next = rel.v;
    blk.block<3, 3>(3, 3) +=
        rot_momentum_jacobian(mech_.bodies[i].J, psi_next) * dpsi;
  }

  for (const JointData& jd : joint_data_) {
    const Joint& joint = mech_.joints[jd.joint_index];
    const int l = jd.l;
    // Dynamics rows vs. impulse columns (impulse map at the current config).
    auto fill_side = [&](int body, int col0) {
      MatX& blk = out->block(body_node_[body], jd.node);
      blk.block(0, 0, 3, l) -= jd.k_now.block(0, col0, l, 3).transpose();
      blk.block(3, 0, 3, l) -=
          0.25 * h * jd.k_now.block(0, col0 + 3, l, 3).transpose();
    };
    if (jd.parent_body >= 0) fill_side(jd.parent_body, 0);
    fill_side(jd.child_body, 6);
    // Constraint rows vs. next configuration.
    BodyConfig xa = joint.parent == kWorldId ? BodyConfig{}
                                             : config_next(w, jd.parent_body);
    BodyConfig xb = config_next(w, jd.child_body);
    const MatX k_next = joint_jacobian(joint, xa, xb);
    if (jd.parent_body >= 0) {
      out->block(jd.node, body_node_[jd.parent_body]).block(0, 0, l, 6) +=
          k_next.block(0, 0, l, 6);
    }
    out->block(jd.node, body_node_[jd.child_body]).block(0, 0, l, 6) +=
        k_next.block(0, 6, l, 6);
  }

  for (const ContactData& cd : contact_data_) {
    const ContactSpec& spec = mech_.contacts[cd.contact_index];
    const ConeMode mode = spec.cone_mode;
    const int nb = mode == ConeMode::kNonlinear ? 4 : 6;
    const BodyConfig next = config_next(w, cd.body);
    const Mat3 r_next = rotation_matrix(next.q);

    // Dynamics rows vs. cone variables.
    const MatX imap = contact_impulse_map(cd, mode);
    MatX& body_blk = out->block(body_node_[cd.body], cd.node);
    body_blk.block(0, 0, 3, nb) -= imap;
    body_blk.block(3, 0, 3, nb) -= 0.25 * h * cd.torque_map * imap;

    // Contact equality rows vs. the body's next configuration.
    MatX& cb = out->block(cd.node, body_node_[cd.body]);
    Vec3 n_eff = cd.frame.n;
    if (spec.surface == SurfaceKind::kSphere) {
      n_eff = (contact_point(spec, next) - spec.sphere_center).normalized();
    }
    const Mat3 danchor = -2.0 * r_next * skew(spec.offset);
    cb.block<1, 3>(0, 0) = -n_eff.transpose();
    cb.block<1, 3>(0, 3) = -n_eff.transpose() * danchor;
    MatX tbasis(3, 2);
    tbasis.col(0) = cd.frame.t1;
    tbasis.col(1) = cd.frame.t2;
    MatX dv(2, 6);
    dv.block<2, 3>(0, 0) = tbasis.transpose() / h;
    dv.block<2, 3>(0, 3) = tbasis.transpose() * danchor / h;
    if (mode == ConeMode::kNonlinear) {
      cb.block<2, 6>(1, 0) += dv;
    } else {
      cb.block<2, 6>(1, 0) += dv;
      cb.block<2, 6>(3, 0) -= dv;
    }

    // Diagonal block.
    MatX& diag = out->block(cd.node, cd.node);
    const double gamma = w.b(cd.orthant_off);
    if (mode == ConeMode::kNonlinear) {
      // cols: 0 gamma, 1-3 beta, 4 s, 5-7 eta; rows: eq (4), compl (4).
      const VecX beta = w.b.segment(cd.soc_off, 3);
      const VecX eta = w.c.segment(cd.soc_off, 3);
      const double s = w.c(cd.orthant_off);
      diag(0, 4) += 1.0;
      diag(1, 6) -= 1.0;
      diag(2, 7) -= 1.0;
      diag(3, 0) -= spec.friction;
      diag(3, 1) += 1.0;
      diag(4, 0) += s;
      diag(4, 4) += gamma;
      diag.block<3, 3>(5, 1) += soc_arrow(eta);
      diag.block<3, 3>(5, 5) += soc_arrow(beta);
    } else {
      // cols: 0 gamma, 1-4 beta, 5 psi, 6 s, 7-10 eta, 11 s_psi.
      const VecX beta = w.b.segment(cd.orthant_off + 1, 4);
      const double psi_dual = w.b(cd.orthant_off + 5);
      const VecX eta = w.c.segment(cd.orthant_off + 1, 4);
      const double s_psi = w.c(cd.orthant_off + 5);
      const double s = w.c(cd.orthant_off);
      diag(0, 6) += 1.0;
      for (int k = 0; k < 4; ++k) {
        diag(1 + k, 5) += 1.0;
        diag(1 + k, 7 + k) -= 1.0;
      }
      diag(5, 0) -= spec.friction;
      for (int k = 0; k < 4; ++k) diag(5, 1 + k) += 1.0;
      diag(5, 11) += 1.0;
      // Elementwise complementarity rows.
      diag(6, 0) += s;
      diag(6, 6) += gamma;
      for (int k = 0; k < 4; ++k) {
        diag(7 + k, 1 + k) += eta(k);
        diag(7 + k, 7 + k) += beta(k);
      }
      diag(11, 5) += s_psi;
      diag(11, 11) += psi_dual;
    }
  }
}

MatX NcpProblem::data_jacobian(const SolverPoint& w) const {
  return data_jacobian_impl(w, true);
}

MatX NcpProblem::data_jacobian_params(const SolverPoint& w) const {
  return data_jacobian_impl(w, false).rightCols(theta_.total - theta_.cf);
}

MatX NcpProblem::data_jacobian_impl(const SolverPoint& w,
                                    bool state_columns) const {
  const int n_bodies = num_bodies();
  const double h = mech_.timestep;
  MatX d = MatX::Zero(residual_dim(), theta_.total);

  std::vector<Vec3> lin(n_bodies, Vec3::Zero()), rot(n_bodies, Vec3::Zero());
  accumulate_impulses(w, &lin, &rot);

  for (int i = 0; i < n_bodies; ++i) {
    const Body& body = mech_.bodies[i];
    const BodyConfig next = config_next(w, i);
    const Vec3 psi_next = psi_from_configs(z_[i].q, next.q);
    const Vec3 psi = psi_prev_[i];

    if (state_columns) {
      // Previous configuration.
      d.block<3, 3>(6 * i, theta_.zprev + 6 * i) =
          body.m / h * Mat3::Identity();
      const UnitQuaternion rel_prev =
          quat_mul(z_prev_[i].q.conjugate(), z_[i].q);
      d.block<3, 3>(6 * i + 3, theta_.zprev + 6 * i + 3) =
          rot_momentum_conj_jacobian(body.J, psi) * vmat() * rmat(rel_prev) *
          hmat();

      // Inputs.
      d.block<3, 3>(6 * i, theta_.u + 6 * i) = -h * Mat3::Identity();
      d.block<3, 3>(6 * i + 3, theta_.u + 6 * i + 3) =
          -0.5 * h * h * Mat3::Identity();
    }

    // Mass and inertia.
    d.block<3, 1>(6 * i, theta_.mass + i) =
        (next.p - 2.0 * z_[i].p + z_prev_[i].p) / h - h * mech_.gravity;
    const double sq_next = std::sqrt(1.0 - psi_next.squaredNorm());
    const double sq = std::sqrt(1.0 - psi.squaredNorm());
    for (int k = 0; k < 6; ++k) {
      const Mat3 s = sym_basis(k);
      d.block<3, 1>(6 * i + 3, theta_.inertia + 6 * i + k) =
          sq_next * (s * psi_next) + psi_next.cross(s * psi_next) -
          (sq * (s * psi) - psi.cross(s * psi));
    }

    // Time step.
    d.block<3, 1>(6 * i, theta_.h) =
        -body.m * (next.p - 2.0 * z_[i].p + z_prev_[i].p) / (h * h) -
        body.m * mech_.gravity - u_[i].f;
    d.block<3, 1>(6 * i + 3, theta_.h) = -rot[i] / h - h * u_[i].tau;
  }

  for (const ContactData& cd : contact_data_) {
    const ContactSpec& spec = mech_.contacts[cd.contact_index];
    const BodyConfig next = config_next(w, cd.body);
    const double gamma = w.b(cd.orthant_off);
    const int cf_row =
        spec.cone_mode == ConeMode::kNonlinear ? cd.eq_row + 3 : cd.eq_row + 5;
    d(cf_row, theta_.cf + cd.contact_index) = -gamma;

    const Vec2 v = tangential_velocity(spec, z_[cd.body], next, h, cd.frame);
    if (spec.cone_mode == ConeMode::kNonlinear) {
      d.block<2, 1>(cd.eq_row + 1, theta_.h) = -v / h;
    } else {
      d.block<2, 1>(cd.eq_row + 1, theta_.h) = -v / h;
      d.block<2, 1>(cd.eq_row + 3, theta_.h) = v / h;
    }

    const int off_col = theta_.offsets + 3 * cd.contact_index;
    if (spec.surface == SurfaceKind::kHalfspace) {
      VecX beta;
      if (spec.cone_mode == ConeMode::kNonlinear) {
        beta = w.b.segment(cd.soc_off, 3);
      } else {
        beta = w.b.segment(cd.orthant_off + 1, 4);
      }
      const Vec2 fb = friction_from_beta(spec.cone_mode, beta);
      const Vec3 impulse =
          gamma * cd.frame.n + fb(0) * cd.frame.t1 + fb(1) * cd.frame.t2;
      const Mat3 r_now = rotation_matrix(z_[cd.body].q);
      const Mat3 r_next = rotation_matrix(next.q);
      d.block<3, 3>(6 * cd.body + 3, off_col) =
          0.5 * h * skew(r_now.transpose() * impulse);
      d.block<1, 3>(cd.eq_row, off_col) =
          -(cd.frame.n.transpose() * r_next);
      MatX tbasis(3, 2);
      tbasis.col(0) = cd.frame.t1;
      tbasis.col(1) = cd.frame.t2;
      const MatX dv_off = tbasis.transpose() * (r_next - r_now) / h;
      d.block<2, 3>(cd.eq_row + 1, off_col) = dv_off;
      if (spec.cone_mode == ConeMode::kLinearized) {
        d.block<2, 3>(cd.eq_row + 3, off_col) = -dv_off;
      }
    } else {
      // Static-sphere frames depend on the offset; differentiate numerically.
      for (int k = 0; k < 3; ++k) {
        Mechanism mp = mech_, mm = mech_;
        mp.contacts[cd.contact_index].offset(k) += kFdStep;
        mm.contacts[cd.contact_index].offset(k) -= kFdStep;
        NcpProblem pp(mp, z_prev_, z_, u_);
        NcpProblem pm(mm, z_prev_, z_, u_);
        d.col(off_col + k) +=
            (pp.residual(w, 0.0) - pm.residual(w, 0.0)) / (2.0 * kFdStep);
      }
    }
  }

  if (!state_columns) return d;

  // Current configuration: differentiate by re-assembly; it enters the
  // integrator, the impulse maps, the contact frames, and the velocities.
  for (int i = 0; i < n_bodies; ++i) {
    for (int k = 0; k < 6; ++k) {
      auto perturb = [&](double eps) {
        std::vector<BodyConfig> z_mod = z_;
        if (k < 3) {
          z_mod[i].p(k) += eps;
        } else {
          Vec3 step = Vec3::Zero();
          step(k - 3) = eps;
          z_mod[i].q = quat_mul(z_[i].q, phi_map(step));
        }
        return NcpProblem(mech_, z_prev_, z_mod, u_).residual(w, 0.0);
      };
      d.col(theta_.z + 6 * i + k) =
          (perturb(kFdStep) - perturb(-kFdStep)) / (2.0 * kFdStep);
    }
  }
  return d;
}

SolverPoint NcpProblem::cold_start() const {
  SolverPoint w;
  w.a = VecX::Zero(n_a_value_);
  for (int i = 0; i < num_bodies(); ++i) {
    w.a.segment<3>(7 * i) = 2.0 * z_[i].p - z_prev_[i].p;
    const UnitQuaternion rel = quat_mul(z_prev_[i].q.conjugate(), z_[i].q);
    UnitQuaternion q_next = z_[i].q;
    if (rel.s > 0.0 && rel.v.norm() < 0.5) {
      q_next = quat_mul(z_[i].q, rel);
    }
    w.a.segment<4>(7 * i + 3) = q_next.vec4();
  }
  w.b = cone_identity(cone_layout_);
  w.c = cone_identity(cone_layout_);
  return w;
}

std::vector<BodyConfig> NcpProblem::extract_z_next(const SolverPoint& w) const {
  std::vector<BodyConfig> out(num_bodies());
  for (int i = 0; i < num_bodies(); ++i) out[i] = config_next(w, i);
  return out;
}

VecX NcpProblem::extract_joint_impulses(const SolverPoint& w) const {
  return w.a.tail(impulse_dim_);
}

std::vector<ContactVars> NcpProblem::extract_contacts(const SolverPoint& w) const {
  std::vector<ContactVars> out(num_contacts());
  for (const ContactData& cd : contact_data_) {
    const ContactSpec& spec = mech_.contacts[cd.contact_index];
    ContactVars& cv = out[cd.contact_index];
    cv.gamma = w.b(cd.orthant_off);
    if (spec.cone_mode == ConeMode::kNonlinear) {
      cv.beta = w.b.segment(cd.soc_off, 3);
      cv.eta = w.c.segment(cd.soc_off, 3);
    } else {
      cv.beta = w.b.segment(cd.orthant_off + 1, 4);
      cv.eta = w.c.segment(cd.orthant_off + 1, 4);
      cv.psi_dual = w.b(cd.orthant_off + 5);
    }
    cv.b = friction_from_beta(spec.cone_mode, cv.beta);
    cv.phi = signed_distance(spec, config_next(w, cd.body));
  }
  return out;
}

NcpProblem assemble_ncp(const Mechanism& mech,
                        const std::vector<BodyConfig>& z_prev,
                        const std::vector<BodyConfig>& z,
                        const std::vector<BodyInput>& u) {
  return NcpProblem(mech, z_prev, z, u);
}

}  // namespace dojo
