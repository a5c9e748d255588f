#include "geomdyn/dynamics.hpp"

#include "geomdyn/liealg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace geomdyn {

namespace {

// Below this reciprocal condition estimate the KKT matrix is treated as
// singular and the constraint rows are analysed for redundancy.
constexpr double kSingularRcond = 1e-13;
constexpr double kRankTolerance = 1e-10;

using RowVec = Eigen::RowVectorXd;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

// A world-frame vector attached to the bodies, with its rate, its Jacobian
// with respect to the stacked velocities and the velocity-quadratic part of
// its second derivative.
struct KinVec {
  Vec3 value;
  Vec3 rate;
  Mat3X jac;
  Vec3 bias;
};

struct KinScalar {
  double value;
  double rate;
  RowVec jac;
  double bias;
};

KinVec ground_vec(const Vec3& value, int ndof) {
  return {value, Vec3::Zero(), Mat3X::Zero(3, ndof), Vec3::Zero()};
}

// World position of body point a.
KinVec point_of(const MbsModel& model, const MbsState& state, int body, const Vec3& a) {
  const int ndof = model.velocity_dim();
  if (body == kGround) return ground_vec(a, ndof);
  const Pose& c = state.poses[body];
  const Vec6& vel = state.velocities[body];
  const Vec3 w = rot_part(vel), lin = lin_part(vel);
  KinVec k{c.r + c.R * a, Vec3::Zero(), Mat3X::Zero(3, ndof), Vec3::Zero()};
  k.jac.block<3, 3>(0, 6 * body) = -c.R * hat3(a);
  if (representation_for(model.bodies[body].cspace) == Representation::BodyFixed) {
    k.jac.block<3, 3>(0, 6 * body + 3) = c.R;
    const Vec3 local = lin + w.cross(a);
    k.rate = c.R * local;
    k.bias = c.R * w.cross(local);
  } else {
    k.jac.block<3, 3>(0, 6 * body + 3) = Mat3::Identity();
    k.rate = lin + c.R * w.cross(a);
    k.bias = c.R * w.cross(w.cross(a));
  }
  return k;
}

// World direction of body-fixed vector e.
KinVec direction_of(const MbsModel& model, const MbsState& state, int body, const Vec3& e) {
  const int ndof = model.velocity_dim();
  if (body == kGround) return ground_vec(e, ndof);
  const Pose& c = state.poses[body];
  const Vec3 w = rot_part(state.velocities[body]);
  KinVec k{c.R * e, c.R * w.cross(e), Mat3X::Zero(3, ndof), c.R * w.cross(w.cross(e))};
  k.jac.block<3, 3>(0, 6 * body) = -c.R * hat3(e);
  return k;
}

KinVec minus(const KinVec& x, const KinVec& y) {
  return {x.value - y.value, x.rate - y.rate, x.jac - y.jac, x.bias - y.bias};
}

KinScalar dot(const KinVec& x, const KinVec& y) {
  return {x.value.dot(y.value), x.rate.dot(y.value) + x.value.dot(y.rate),
          y.value.transpose() * x.jac + x.value.transpose() * y.jac,
          x.bias.dot(y.value) + x.value.dot(y.bias) + 2.0 * x.rate.dot(y.rate)};
}

// Unit vector perpendicular to e, chosen from the coordinate axis least
// aligned with it.
Vec3 default_perpendicular(const Vec3& e) {
  Eigen::Index k;
  e.cwiseAbs().minCoeff(&k);
  return e.cross(Vec3::Unit(k)).normalized();
}

struct RowBuilder {
  int ndof;
  std::vector<double> h, eta;
  std::vector<RowVec> jac;

  void add(const KinScalar& s) {
    h.push_back(s.value);
    eta.push_back(-s.bias);
    jac.push_back(s.jac);
  }
  void add(const KinVec& v) {
    for (int i = 0; i < 3; ++i) {
      h.push_back(v.value[i]);
      eta.push_back(-v.bias[i]);
      jac.push_back(v.jac.row(i));
    }
  }
  JointRows finish(int position_rows) const {
    const int m = static_cast<int>(h.size());
    JointRows out{VecX(m), MatX(m, ndof), VecX(m), position_rows};
    for (int i = 0; i < m; ++i) {
      out.h[i] = h[i];
      out.eta[i] = eta[i];
      out.jac.row(i) = jac[i];
    }
    return out;
  }
};

void add_point_force(const MbsModel& model, const MbsState& state, int body, const Vec3& a,
                     const Vec3& f_world, std::vector<Wrench>& out) {
  if (body == kGround) return;
  const Mat3& R = state.poses[body].R;
  const Vec3 f_body = R.transpose() * f_world;
  const Vec3 moment = a.cross(f_body);
  if (representation_for(model.bodies[body].cspace) == Representation::BodyFixed) {
    out[body] += stack(moment, f_body);
  } else {
    out[body] += stack(moment, f_world);
  }
}

VecX stacked_velocities(const MbsState& state) {
  VecX v(6 * state.velocities.size());
  for (size_t i = 0; i < state.velocities.size(); ++i) v.segment<6>(6 * i) = state.velocities[i];
  return v;
}

std::string body_label(const MbsModel& model, int index) {
  const auto& name = model.bodies[index].name;
  return name.empty() ? "body " + std::to_string(index) : "body '" + name + "'";
}

std::string joint_label(const MbsModel& model, int index) {
  const auto& name = model.joints[index].name;
  return name.empty() ? "joint " + std::to_string(index) : name;
}

}  // namespace

Representation representation_for(GroupKind group) {
  return group == GroupKind::SE3 ? Representation::BodyFixed : Representation::Mixed;
}

Mat3 parallel_axis(const Mat3& inertia_com, double mass, const Vec3& com_offset) {
  const Mat3 k = hat3(com_offset);
  return inertia_com - mass * k * k;
}

Mat3 box_inertia(double mass, const Vec3& edges) {
  const Vec3 e2 = edges.cwiseProduct(edges);
  return (mass / 12.0 * Vec3(e2.y() + e2.z(), e2.x() + e2.z(), e2.x() + e2.y())).asDiagonal();
}

const char* joint_kind_name(JointKind kind) {
  switch (kind) {
    case JointKind::Spherical: return "spherical";
    case JointKind::Revolute: return "revolute";
    case JointKind::Prismatic: return "prismatic";
    case JointKind::Universal: return "universal";
  }
  return "?";
}

JointKind parse_joint_kind(const std::string& name) {
  for (auto k : {JointKind::Spherical, JointKind::Revolute, JointKind::Prismatic,
                 JointKind::Universal}) {
    if (name == joint_kind_name(k)) return k;
  }
  throw ModelError("unknown joint kind '" + name + "'");
}

int joint_dimension(JointKind kind) {
  switch (kind) {
    case JointKind::Spherical: return 3;
    case JointKind::Revolute: return 5;
    case JointKind::Prismatic: return 5;
    case JointKind::Universal: return 4;
  }
  return 0;
}

int MbsModel::constraint_dim() const {
  int m = 0;
  for (const auto& j : joints) m += joint_dimension(j.kind);
  return m;
}

MbsModel with_group(MbsModel model, GroupKind group) {
  for (auto& b : model.bodies) b.cspace = group;
  return model;
}

void validate(const MbsModel& model) {
  const int n = model.body_count();
  if (n == 0) throw ModelError("model '" + model.name + "' has no bodies");
  for (int i = 0; i < n; ++i) {
    const RigidBody& b = model.bodies[i];
    if (!(b.mass > 0.0) || !std::isfinite(b.mass)) {
      throw ModelError(body_label(model, i) + ": mass must be positive");
    }
    const Mat3& th = b.inertia_ref;
    if (!th.allFinite() || (th - th.transpose()).cwiseAbs().maxCoeff() > 1e-12 * th.norm()) {
      throw ModelError(body_label(model, i) + ": inertia is not symmetric");
    }
    if (Eigen::LLT<Mat6>(spatial_inertia(b)).info() != Eigen::Success ||
        Eigen::LLT<Mat3>(th).info() != Eigen::Success) {
      throw ModelError(body_label(model, i) + ": inertia is not positive definite");
    }
  }
  for (int j = 0; j < static_cast<int>(model.joints.size()); ++j) {
    const Joint& jt = model.joints[j];
    const std::string label = joint_label(model, j);
    auto check_body = [&](int idx) {
      if (idx != kGround && (idx < 0 || idx >= n)) {
        throw ModelError(label + ": body index " + std::to_string(idx) + " out of range");
      }
    };
    check_body(jt.body_a);
    check_body(jt.body_b);
    if (jt.body_a == jt.body_b) throw ModelError(label + ": connects a body to itself");
    if (jt.kind != JointKind::Spherical) {
      for (const Vec3* ax : {&jt.axis_a, &jt.axis_b}) {
        if (std::abs(ax->norm() - 1.0) > 1e-12) throw ModelError(label + ": axis is not unit");
      }
    }
    if (jt.kind == JointKind::Prismatic) {
      for (auto [ref, ax] : {std::pair{&jt.ref_a, &jt.axis_a}, std::pair{&jt.ref_b, &jt.axis_b}}) {
        if (ref->isZero()) continue;
        if (std::abs(ref->norm() - 1.0) > 1e-12 || std::abs(ref->dot(*ax)) > 1e-12) {
          throw ModelError(label + ": reference vector must be unit and perpendicular to the axis");
        }
      }
    }
  }
  for (const auto& f : model.forces) {
    if (const auto* s = std::get_if<LinearSpring>(&f)) {
      for (int idx : {s->body_a, s->body_b}) {
        if (idx != kGround && (idx < 0 || idx >= n)) {
          throw ModelError("spring '" + s->name + "': body index out of range");
        }
      }
      if (!(s->stiffness >= 0.0) || !std::isfinite(s->stiffness)) {
        throw ModelError("spring '" + s->name + "': stiffness must be non-negative");
      }
    }
  }
}

MbsState convert_state(const MbsModel& from, const MbsState& state, const MbsModel& to) {
  MbsState out = state;
  for (int i = 0; i < from.body_count(); ++i) {
    const auto rf = representation_for(from.bodies[i].cspace);
    const auto rt = representation_for(to.bodies[i].cspace);
    if (rf == rt) continue;
    const Mat3& R = state.poses[i].R;
    const Vec6& v = state.velocities[i];
    out.velocities[i] = stack(rot_part(v), rf == Representation::BodyFixed
                                                ? Vec3(R * lin_part(v))
                                                : Vec3(R.transpose() * lin_part(v)));
  }
  return out;
}

Vec6 body_twist(const MbsModel& model, const MbsState& state, int body) {
  const Vec6& v = state.velocities[body];
  if (representation_for(model.bodies[body].cspace) == Representation::BodyFixed) return v;
  return stack(rot_part(v), state.poses[body].R.transpose() * lin_part(v));
}

SpatialInertia spatial_inertia(const RigidBody& body) {
  Mat6 j = Mat6::Zero();
  const Mat3 k = body.mass * hat3(body.com_offset);
  j.topLeftCorner<3, 3>() = body.inertia_ref;
  j.topRightCorner<3, 3>() = k;
  j.bottomLeftCorner<3, 3>() = -k;
  j.bottomRightCorner<3, 3>() = body.mass * Mat3::Identity();
  return j;
}

BodyEquation newton_euler_body(const RigidBody& body, const Vec6& twist, const Wrench& wrench) {
  const Mat6 j = spatial_inertia(body);
  return {j, wrench + se3_ad(twist).transpose() * (j * twist)};
}

BodyEquation newton_euler_mixed(const RigidBody& body, const Mat3& R, const Vec6& velocity,
                                const Wrench& wrench) {
  const Vec3 w = rot_part(velocity);
  const Mat3 k = body.mass * hat3(body.com_offset);
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = body.inertia_ref;
  m.topRightCorner<3, 3>() = k * R.transpose();
  m.bottomLeftCorner<3, 3>() = -R * k;
  m.bottomRightCorner<3, 3>() = body.mass * Mat3::Identity();
  const Vec3 gyro = w.cross(body.inertia_ref * w);
  const Vec3 centripetal = body.mass * (R * w.cross(w.cross(body.com_offset)));
  return {m, wrench - stack(gyro, centripetal)};
}

JointRows evaluate_joint(const MbsModel& model, const Joint& joint, const MbsState& state) {
  RowBuilder rows{model.velocity_dim(), {}, {}, {}};
  const int a = joint.body_a, b = joint.body_b;
  const KinVec pa = point_of(model, state, a, joint.anchor_a);
  const KinVec pb = point_of(model, state, b, joint.anchor_b);
  const KinVec d = minus(pb, pa);

  switch (joint.kind) {
    case JointKind::Spherical:
      rows.add(d);
      return rows.finish(3);
    case JointKind::Revolute: {
      rows.add(d);
      const Vec3 s = default_perpendicular(joint.axis_b);
      const Vec3 t = joint.axis_b.cross(s);
      const KinVec ua = direction_of(model, state, a, joint.axis_a);
      rows.add(dot(ua, direction_of(model, state, b, s)));
      rows.add(dot(ua, direction_of(model, state, b, t)));
      return rows.finish(3);
    }
    case JointKind::Universal: {
      rows.add(d);
      rows.add(dot(direction_of(model, state, a, joint.axis_a),
                   direction_of(model, state, b, joint.axis_b)));
      return rows.finish(3);
    }
    case JointKind::Prismatic: {
      const Vec3 sa_local = joint.ref_a.isZero() ? default_perpendicular(joint.axis_a) : joint.ref_a;
      const Vec3 sb_local = joint.ref_b.isZero() ? default_perpendicular(joint.axis_b) : joint.ref_b;
      const KinVec sa = direction_of(model, state, a, sa_local);
      const KinVec ta = direction_of(model, state, a, joint.axis_a.cross(sa_local));
      const KinVec sb = direction_of(model, state, b, sb_local);
      const KinVec tb = direction_of(model, state, b, joint.axis_b.cross(sb_local));
      const KinVec ua = direction_of(model, state, a, joint.axis_a);
      rows.add(dot(d, sa));
      rows.add(dot(d, ta));
      rows.add(dot(ua, sb));
      rows.add(dot(ua, tb));
      rows.add(dot(sa, tb));
      return rows.finish(2);
    }
  }
  throw ModelError("unhandled joint kind");
}

namespace {

MbsState pose_only_state(const MbsModel& model, const std::vector<Pose>& poses) {
  return {0.0, poses, std::vector<Vec6>(model.body_count(), Vec6::Zero())};
}

}  // namespace

VecX joint_geometry(const MbsModel& model, const Joint& joint, const std::vector<Pose>& poses) {
  return evaluate_joint(model, joint, pose_only_state(model, poses)).h;
}

MatX joint_jacobian(const MbsModel& model, const Joint& joint, const std::vector<Pose>& poses) {
  return evaluate_joint(model, joint, pose_only_state(model, poses)).jac;
}

VecX joint_acc_rhs(const MbsModel& model, const Joint& joint, const MbsState& state) {
  return evaluate_joint(model, joint, state).eta;
}

JointResidual joint_residual(const MbsModel& model, const Joint& joint,
                             const std::vector<Pose>& poses) {
  const JointRows rows = evaluate_joint(model, joint, pose_only_state(model, poses));
  const int p = rows.position_rows;
  return {rows.h.head(p).norm(), rows.h.tail(rows.h.size() - p).norm()};
}

ConstraintSystem assemble_constraints(const MbsModel& model, const MbsState& state) {
  const int m = model.constraint_dim();
  ConstraintSystem sys{VecX(m), MatX(m, model.velocity_dim()), VecX(m), {}};
  int row = 0;
  for (int j = 0; j < static_cast<int>(model.joints.size()); ++j) {
    const JointRows r = evaluate_joint(model, model.joints[j], state);
    const int k = static_cast<int>(r.h.size());
    sys.h.segment(row, k) = r.h;
    sys.jac.middleRows(row, k) = r.jac;
    sys.eta.segment(row, k) = r.eta;
    for (int i = 0; i < k; ++i) sys.row_joint.push_back(j);
    row += k;
  }
  return sys;
}

Vec3 world_point(const MbsState& state, int body, const Vec3& point) {
  if (body == kGround) return point;
  const Pose& c = state.poses[body];
  return c.r + c.R * point;
}

std::vector<Wrench> force_assembly(const MbsModel& model, const MbsState& state) {
  std::vector<Wrench> out(model.body_count(), Wrench::Zero());
  for (const auto& f : model.forces) {
    if (const auto* g = std::get_if<Gravity>(&f)) {
      for (int i = 0; i < model.body_count(); ++i) {
        const RigidBody& b = model.bodies[i];
        add_point_force(model, state, i, b.com_offset, b.mass * g->g, out);
      }
    } else if (const auto* s = std::get_if<LinearSpring>(&f)) {
      const Vec3 pa = world_point(state, s->body_a, s->point_a);
      const Vec3 pb = world_point(state, s->body_b, s->point_b);
      const Vec3 on_b = s->stiffness * (pa - pb);
      add_point_force(model, state, s->body_b, s->point_b, on_b, out);
      add_point_force(model, state, s->body_a, s->point_a, -on_b, out);
    }
  }
  return out;
}

double kinetic_energy(const MbsModel& model, const MbsState& state) {
  double t = 0.0;
  for (int i = 0; i < model.body_count(); ++i) {
    const Vec6 v = body_twist(model, state, i);
    t += 0.5 * v.dot(spatial_inertia(model.bodies[i]) * v);
  }
  return t;
}

double potential_energy(const MbsModel& model, const MbsState& state) {
  double u = 0.0;
  for (const auto& f : model.forces) {
    if (const auto* g = std::get_if<Gravity>(&f)) {
      for (int i = 0; i < model.body_count(); ++i) {
        const RigidBody& b = model.bodies[i];
        u -= b.mass * g->g.dot(world_point(state, i, b.com_offset));
      }
    } else if (const auto* s = std::get_if<LinearSpring>(&f)) {
      const Vec3 d = world_point(state, s->body_a, s->point_a) -
                     world_point(state, s->body_b, s->point_b);
      u += 0.5 * s->stiffness * d.squaredNorm();
    }
  }
  return u;
}

KktSystem assemble_index1(const MbsModel& model, const MbsState& state) {
  const int n = model.velocity_dim();
  const ConstraintSystem cons = assemble_constraints(model, state);
  const int m = static_cast<int>(cons.h.size());
  KktSystem sys{MatX::Zero(n + m, n + m), VecX::Zero(n + m), n, cons.row_joint};
  const std::vector<Wrench> wrenches = force_assembly(model, state);
  for (int i = 0; i < model.body_count(); ++i) {
    const RigidBody& b = model.bodies[i];
    const BodyEquation eq =
        representation_for(b.cspace) == Representation::BodyFixed
            ? newton_euler_body(b, state.velocities[i], wrenches[i])
            : newton_euler_mixed(b, state.poses[i].R, state.velocities[i], wrenches[i]);
    sys.matrix.block<6, 6>(6 * i, 6 * i) = eq.mass;
    sys.rhs.segment<6>(6 * i) = eq.rhs;
  }
  sys.matrix.topRightCorner(n, m) = cons.jac.transpose();
  sys.matrix.bottomLeftCorner(m, n) = cons.jac;
  sys.rhs.tail(m) = cons.eta;
  return sys;
}

namespace {

// Joints owning constraint rows that are linearly dependent on earlier rows.
std::vector<std::string> redundant_joints(const MbsModel& model, const KktSystem& sys) {
  const int n = sys.velocity_dim;
  const int m = static_cast<int>(sys.matrix.rows()) - n;
  const MatX jac = sys.matrix.bottomLeftCorner(m, n);
  std::set<int> bad;
  MatX kept(0, n);
  for (int i = 0; i < m; ++i) {
    MatX trial(kept.rows() + 1, n);
    trial << kept, jac.row(i);
    Eigen::FullPivLU<MatX> lu(trial);
    lu.setThreshold(kRankTolerance);
    if (lu.rank() == trial.rows()) {
      kept = trial;
    } else {
      bad.insert(sys.row_joint[i]);
    }
  }
  std::vector<std::string> names;
  for (int j : bad) names.push_back(joint_label(model, j));
  return names;
}

}  // namespace

KktSolution solve_index1(const MbsModel& model, const KktSystem& system) {
  const int n = system.velocity_dim;
  const int m = static_cast<int>(system.matrix.rows()) - n;
  // M is positive definite, so the KKT matrix is singular iff J is rank
  // deficient. The LU rcond estimate alone misses exactly singular cases.
  Eigen::FullPivLU<MatX> jac_lu(system.matrix.bottomLeftCorner(m, n));
  jac_lu.setThreshold(kRankTolerance);
  Eigen::PartialPivLU<MatX> lu(system.matrix);
  const VecX x = lu.solve(system.rhs);
  if (jac_lu.rank() < m || lu.rcond() < kSingularRcond || !x.allFinite()) {
    std::vector<std::string> names = redundant_joints(model, system);
    std::ostringstream msg;
    msg << "singular KKT matrix (rcond " << lu.rcond() << ")";
    if (!names.empty()) {
      msg << "; redundant constraints in:";
      for (const auto& s : names) msg << ' ' << s;
    }
    throw SingularSystemError(msg.str(), std::move(names));
  }
  return {x.head(n), x.tail(m)};
}

std::vector<Vec6> accelerations(const MbsModel& model, const MbsState& state) {
  const KktSolution sol = solve_index1(model, assemble_index1(model, state));
  std::vector<Vec6> out(model.body_count());
  for (int i = 0; i < model.body_count(); ++i) out[i] = sol.accel.segment<6>(6 * i);
  return out;
}

double velocity_residual(const MbsModel& model, const MbsState& state) {
  if (model.joints.empty()) return 0.0;
  const ConstraintSystem cons = assemble_constraints(model, state);
  return (cons.jac * stacked_velocities(state)).norm();
}

MbsState project_velocities(const MbsModel& model, const MbsState& state) {
  if (model.joints.empty()) return state;
  KktSystem sys = assemble_index1(model, state);
  const int n = sys.velocity_dim;
  const MatX jac = sys.matrix.bottomLeftCorner(sys.matrix.rows() - n, n);
  sys.rhs.setZero();
  sys.rhs.tail(jac.rows()) = -(jac * stacked_velocities(state));
  const KktSolution sol = solve_index1(model, sys);
  MbsState out = state;
  for (int i = 0; i < model.body_count(); ++i) out.velocities[i] += sol.accel.segment<6>(6 * i);
  return out;
}

void check_consistent(const MbsModel& model, const MbsState& state, double position_tol,
                      double velocity_tol) {
  if (static_cast<int>(state.poses.size()) != model.body_count() ||
      static_cast<int>(state.velocities.size()) != model.body_count()) {
    throw ModelError("state does not match the number of bodies");
  }
  if (model.joints.empty()) return;
  const ConstraintSystem cons = assemble_constraints(model, state);
  const double hres = cons.h.norm();
  if (!(hres <= position_tol)) {
    std::ostringstream msg;
    msg << "initial configuration violates the joint constraints: |h| = " << hres;
    throw InfeasibleStateError(msg.str(), hres);
  }
  const double vres = (cons.jac * stacked_velocities(state)).norm();
  if (!(vres <= velocity_tol)) {
    std::ostringstream msg;
    msg << "initial velocities violate the velocity constraints: |J V| = " << vres
        << " exceeds " << velocity_tol;
    throw InfeasibleStateError(msg.str(), vres);
  }
}

}  // namespace geomdyn
