#pragma once

#include "geomdyn/types.hpp"

#include <optional>

namespace geomdyn {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat68 = Eigen::Matrix<double, 6, 8>;
using Mat67 = Eigen::Matrix<double, 6, 7>;

// Scalar-first quaternion (q0, q).
struct Quaternion {
  double w = 1.0;
  Vec3 v = Vec3::Zero();

  static Quaternion identity() { return {}; }
  static Quaternion zero() { return {0.0, Vec3::Zero()}; }
  static Quaternion from_coeffs(const Vec4& c) { return {c[0], c.tail<3>()}; }
  Vec4 coeffs() const {
    Vec4 c;
    c << w, v;
    return c;
  }
  Quaternion conjugate() const { return {w, -v}; }
  double norm() const { return coeffs().norm(); }
  double dot(const Quaternion& o) const { return w * o.w + v.dot(o.v); }
  Quaternion operator-() const { return {-w, -v}; }
};

// (Q, Q_eps). The pose is R = R(Q), (0, r) = 2 Q_eps * conj(Q).
struct DualQuaternion {
  Quaternion real;
  Quaternion dual = Quaternion::zero();

  static DualQuaternion identity() { return {}; }
  static DualQuaternion from_coeffs(const Vec8& c) {
    return {Quaternion::from_coeffs(c.head<4>()), Quaternion::from_coeffs(c.tail<4>())};
  }
  Vec8 coeffs() const {
    Vec8 c;
    c << real.coeffs(), dual.coeffs();
    return c;
  }
};

// Allowed deviation of |Q| from 1 before rotation_from_quat refuses.
inline constexpr double kUnitTolerance = 1e-8;

Quaternion quat_mul(const Quaternion& a, const Quaternion& b);
// quat_mul(a, b) == hamilton_plus(a) * b == hamilton_minus(b) * a
Mat4 hamilton_plus(const Quaternion& q);
Mat4 hamilton_minus(const Quaternion& q);

DualQuaternion dq_mul(const DualQuaternion& a, const DualQuaternion& b);

// D = [-q, q0 I + q^], E = [-q, q0 I - q^]; R = D E^T.
Mat34 dmat(const Quaternion& q);
Mat34 emat(const Quaternion& q);
// Throws InvariantError if | |Q| - 1 | > kUnitTolerance.
Mat3 rotation_from_quat(const Quaternion& q);
// D E^T / |Q|^2; accepts any nonzero Q. Used on integrator stages where the
// norm is only approximately preserved.
Mat3 rotation_from_quat_scaled(const Quaternion& q);
// Unit quaternion of R. With a hint, the sign closest to the hint is chosen.
Quaternion quat_from_rotation(const Mat3& R, const std::optional<Quaternion>& hint = {});

DualQuaternion dq_from_pose(const Pose& c, const std::optional<Quaternion>& hint = {});
Pose pose_from_dq(const DualQuaternion& a);
// Scale-invariant variant of pose_from_dq (see rotation_from_quat_scaled).
Pose pose_from_dq_scaled(const DualQuaternion& a);

// Body-fixed twist V = h_body(A) * dA/dt.
Mat68 h_body(const DualQuaternion& a);
// Mixed velocity (omega, v_s) = h_mixed(A) * dA/dt.
Mat68 h_mixed(const DualQuaternion& a);
// Mixed velocity from Euler-parameter and position rates (dQ/dt, dr/dt).
Mat67 h_euler_params(const Quaternion& q, const Vec3& r);

enum class VelocityFrame { Body, Mixed };

// Rates tangent to the unit-norm and Pluecker manifold that reproduce V.
Vec8 reconstruct_rates(const DualQuaternion& a, const Vec6& velocity, VelocityFrame frame);
// Euler-parameter counterpart: (dQ/dt, dr/dt) from a mixed velocity.
Vec7 reconstruct_euler_rates(const Quaternion& q, const Vec3& r, const Vec6& mixed_velocity);

double unit_residual(const Quaternion& q);
double plucker_residual(const DualQuaternion& a);

}  // namespace geomdyn
