#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace geomdyn {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Screw coordinates X = (xi, eta), twists (omega, v) and mixed velocities
// (omega, v_s) share the same 6-vector layout: rotational part first.
using ScrewCoords = Vec6;
using Twist = Vec6;
using Wrench = Vec6;

inline Vec3 rot_part(const Vec6& x) { return x.head<3>(); }
inline Vec3 lin_part(const Vec6& x) { return x.tail<3>(); }
inline Vec6 stack(const Vec3& a, const Vec3& b) {
  Vec6 out;
  out << a, b;
  return out;
}

// Rigid body configuration (R, r). R is expected to be a rotation matrix;
// composition semantics depend on the group acting on it.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 r = Vec3::Zero();

  static Pose identity() { return {}; }
  Mat4 homogeneous() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = R;
    m.topRightCorner<3, 1>() = r;
    return m;
  }
};

enum class GroupKind { SE3, SO3xR3 };

// Error taxonomy. Each failure mode the callers need to distinguish gets its
// own type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Argument outside the domain of a map (log branch cut, dexpinv pole).
struct DomainError : Error {
  using Error::Error;
};
// Parameterization invariant broken (non-unit quaternion etc).
struct InvariantError : Error {
  using Error::Error;
};
// KKT matrix singular; names the joints whose rows are redundant.
struct SingularSystemError : Error {
  SingularSystemError(const std::string& what, std::vector<std::string> joints)
      : Error(what), offending_joints(std::move(joints)) {}
  std::vector<std::string> offending_joints;
};
// Model definition problems.
struct ModelError : Error {
  using Error::Error;
};
struct InfeasibleStateError : ModelError {
  InfeasibleStateError(const std::string& what, double res)
      : ModelError(what), residual(res) {}
  double residual;
};
// Failure inside a time-stepping loop; carries the step index.
struct StepError : Error {
  StepError(const std::string& what, long long step_index)
      : Error(what), step(step_index) {}
  long long step;
};

}  // namespace geomdyn
