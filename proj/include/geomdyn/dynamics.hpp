#pragma once

#include "geomdyn/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace geomdyn {

// Body index standing for the ground: identity pose, zero velocity.
inline constexpr int kGround = -1;

// Velocity layout of a body. Follows from its c-space group: SE(3) bodies
// carry body-fixed twists (omega, v), SO(3)xR3 bodies mixed velocities
// (omega, v_s).
enum class Representation { BodyFixed, Mixed };
Representation representation_for(GroupKind group);

struct RigidBody {
  std::string name;
  double mass = 1.0;                      // kg
  Mat3 inertia_ref = Mat3::Identity();    // kg m^2, about the reference frame origin
  Vec3 com_offset = Vec3::Zero();         // m, COM in the reference frame
  GroupKind cspace = GroupKind::SE3;
};

// Inertia about the reference frame origin for a COM inertia and COM offset.
Mat3 parallel_axis(const Mat3& inertia_com, double mass, const Vec3& com_offset);
// Solid box with edge lengths along the frame axes, about its centre.
Mat3 box_inertia(double mass, const Vec3& edges);

enum class JointKind { Spherical, Revolute, Prismatic, Universal };
const char* joint_kind_name(JointKind kind);
JointKind parse_joint_kind(const std::string& name);
int joint_dimension(JointKind kind);

struct Joint {
  std::string name;
  JointKind kind = JointKind::Spherical;
  int body_a = kGround;
  int body_b = 0;
  Vec3 anchor_a = Vec3::Zero();  // m, in body a's frame (world for ground)
  Vec3 anchor_b = Vec3::Zero();
  Vec3 axis_a = Vec3::UnitZ();
  Vec3 axis_b = Vec3::UnitZ();
  // Prismatic only: a vector perpendicular to the axis in each body, fixing
  // the roll lock. Zero selects a default perpendicular.
  Vec3 ref_a = Vec3::Zero();
  Vec3 ref_b = Vec3::Zero();
};

struct Gravity {
  Vec3 g = Vec3(0.0, 0.0, -9.81);  // m/s^2
};

// Zero-rest-length linear spring between two points. Either end may be the
// ground, in which case its point is given in world coordinates. The force
// on end b is c * (p_a - p_b).
struct LinearSpring {
  std::string name;
  int body_a = kGround;
  Vec3 point_a = Vec3::Zero();
  int body_b = 0;
  Vec3 point_b = Vec3::Zero();
  double stiffness = 0.0;  // N/m
};

using ForceElement = std::variant<Gravity, LinearSpring>;

struct MbsModel {
  std::string name;
  std::vector<RigidBody> bodies;
  std::vector<Joint> joints;
  std::vector<ForceElement> forces;

  int body_count() const { return static_cast<int>(bodies.size()); }
  int velocity_dim() const { return 6 * body_count(); }
  int constraint_dim() const;
};

// Copy of the model with every body on the given c-space group.
MbsModel with_group(MbsModel model, GroupKind group);
// Throws ModelError naming the offending body, joint or force.
void validate(const MbsModel& model);

struct MbsState {
  double t = 0.0;
  std::vector<Pose> poses;
  std::vector<Vec6> velocities;  // per body, in that body's representation
};

// Converts velocities between representations when bodies change group.
MbsState convert_state(const MbsModel& from, const MbsState& state, const MbsModel& to);
// Body-fixed twist of body i regardless of its representation.
Vec6 body_twist(const MbsModel& model, const MbsState& state, int body);

// --- single-body Newton-Euler ---

using SpatialInertia = Mat6;
SpatialInertia spatial_inertia(const RigidBody& body);

struct BodyEquation {
  Mat6 mass;
  Vec6 rhs;
};
// J V_dot = W + ad_V^T J V.
BodyEquation newton_euler_body(const RigidBody& body, const Vec6& twist, const Wrench& wrench);
// Mixed velocity (omega, v_s); wrench = (body moment about reference, world force).
BodyEquation newton_euler_mixed(const RigidBody& body, const Mat3& R, const Vec6& velocity,
                                const Wrench& wrench);

// --- joints ---

struct JointRows {
  VecX h;     // residual; position rows first
  MatX jac;   // rows x velocity_dim
  VecX eta;   // -Jdot V
  int position_rows = 0;
};

JointRows evaluate_joint(const MbsModel& model, const Joint& joint, const MbsState& state);
VecX joint_geometry(const MbsModel& model, const Joint& joint, const std::vector<Pose>& poses);
MatX joint_jacobian(const MbsModel& model, const Joint& joint, const std::vector<Pose>& poses);
VecX joint_acc_rhs(const MbsModel& model, const Joint& joint, const MbsState& state);

struct JointResidual {
  double position = 0.0;     // m
  double orientation = 0.0;  // dimensionless
};
JointResidual joint_residual(const MbsModel& model, const Joint& joint,
                             const std::vector<Pose>& poses);

// Stacked constraints of all joints.
struct ConstraintSystem {
  VecX h;
  MatX jac;
  VecX eta;
  std::vector<int> row_joint;  // joint index per row
};
ConstraintSystem assemble_constraints(const MbsModel& model, const MbsState& state);

// --- forces and energy ---

std::vector<Wrench> force_assembly(const MbsModel& model, const MbsState& state);
double kinetic_energy(const MbsModel& model, const MbsState& state);
double potential_energy(const MbsModel& model, const MbsState& state);
inline double total_energy(const MbsModel& model, const MbsState& state) {
  return kinetic_energy(model, state) + potential_energy(model, state);
}
// World position of a body point (ground: the point itself).
Vec3 world_point(const MbsState& state, int body, const Vec3& point);

// --- index-1 system ---

struct KktSystem {
  MatX matrix;  // [[M, J^T], [J, 0]]
  VecX rhs;     // (Q, eta)
  int velocity_dim = 0;
  std::vector<int> row_joint;
};
struct KktSolution {
  VecX accel;
  VecX lambda;
};

KktSystem assemble_index1(const MbsModel& model, const MbsState& state);
// Throws SingularSystemError naming the joints with redundant rows.
KktSolution solve_index1(const MbsModel& model, const KktSystem& system);
// Per-body accelerations for the state.
std::vector<Vec6> accelerations(const MbsModel& model, const MbsState& state);

inline constexpr double kVelocityTolerance = 1e-9;

double velocity_residual(const MbsModel& model, const MbsState& state);
// Minimum-norm correction in the kinetic-energy metric with J V = 0.
MbsState project_velocities(const MbsModel& model, const MbsState& state);
// Throws InfeasibleStateError if |h| or |J V| exceed tolerance.
void check_consistent(const MbsModel& model, const MbsState& state,
                      double position_tol = 1e-9, double velocity_tol = kVelocityTolerance);

}  // namespace geomdyn
