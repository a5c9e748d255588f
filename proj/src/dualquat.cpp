#include "geomdyn/dualquat.hpp"

#include "geomdyn/liealg.hpp"

#include <Eigen/LU>

#include <cmath>

namespace geomdyn {

Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.v.dot(b.v), a.w * b.v + b.w * a.v + a.v.cross(b.v)};
}

Mat4 hamilton_plus(const Quaternion& q) {
  Mat4 m;
  m(0, 0) = q.w;
  m.block<1, 3>(0, 1) = -q.v.transpose();
  m.block<3, 1>(1, 0) = q.v;
  m.block<3, 3>(1, 1) = q.w * Mat3::Identity() + hat3(q.v);
  return m;
}

Mat4 hamilton_minus(const Quaternion& q) {
  Mat4 m;
  m(0, 0) = q.w;
  m.block<1, 3>(0, 1) = -q.v.transpose();
  m.block<3, 1>(1, 0) = q.v;
  m.block<3, 3>(1, 1) = q.w * Mat3::Identity() - hat3(q.v);
  return m;
}

DualQuaternion dq_mul(const DualQuaternion& a, const DualQuaternion& b) {
  const Quaternion real = quat_mul(a.real, b.real);
  const Vec4 dual = quat_mul(a.real, b.dual).coeffs() + quat_mul(a.dual, b.real).coeffs();
  return {real, Quaternion::from_coeffs(dual)};
}

Mat34 dmat(const Quaternion& q) {
  Mat34 m;
  m.col(0) = -q.v;
  m.rightCols<3>() = q.w * Mat3::Identity() + hat3(q.v);
  return m;
}

Mat34 emat(const Quaternion& q) {
  Mat34 m;
  m.col(0) = -q.v;
  m.rightCols<3>() = q.w * Mat3::Identity() - hat3(q.v);
  return m;
}

Mat3 rotation_from_quat(const Quaternion& q) {
  const double n = q.norm();
  if (std::abs(n - 1.0) > kUnitTolerance) {
    throw InvariantError("rotation_from_quat: |Q| = " + std::to_string(n) + " is not unit");
  }
  return dmat(q) * emat(q).transpose();
}

Mat3 rotation_from_quat_scaled(const Quaternion& q) {
  return dmat(q) * emat(q).transpose() / q.coeffs().squaredNorm();
}

Quaternion quat_from_rotation(const Mat3& R, const std::optional<Quaternion>& hint) {
  // Shepperd: pick the largest of the four squared components to divide by.
  const double tr = R.trace();
  Vec4 c;
  const Vec4 diag(tr, R(0, 0), R(1, 1), R(2, 2));
  Eigen::Index k;
  diag.maxCoeff(&k);
  if (k == 0) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    c << 0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s, (R(1, 0) - R(0, 1)) / s;
  } else if (k == 1) {
    const double s = 2.0 * std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    c << (R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s, (R(0, 2) + R(2, 0)) / s;
  } else if (k == 2) {
    const double s = 2.0 * std::sqrt(1.0 - R(0, 0) + R(1, 1) - R(2, 2));
    c << (R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s, (R(1, 2) + R(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 - R(0, 0) - R(1, 1) + R(2, 2));
    c << (R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s, (R(1, 2) + R(2, 1)) / s, 0.25 * s;
  }
  c.normalize();
  const Vec4 ref = hint ? hint->coeffs() : Vec4(1.0, 0.0, 0.0, 0.0);
  if (c.dot(ref) < 0.0) c = -c;
  return Quaternion::from_coeffs(c);
}

DualQuaternion dq_from_pose(const Pose& c, const std::optional<Quaternion>& hint) {
  const Quaternion q = quat_from_rotation(c.R, hint);
  const Quaternion t{0.0, c.r};
  const Vec4 dual = 0.5 * quat_mul(t, q).coeffs();
  return {q, Quaternion::from_coeffs(dual)};
}

Pose pose_from_dq(const DualQuaternion& a) {
  const Mat3 R = rotation_from_quat(a.real);
  return {R, 2.0 * dmat(a.real) * a.dual.coeffs()};
}

Pose pose_from_dq_scaled(const DualQuaternion& a) {
  const double n2 = a.real.coeffs().squaredNorm();
  return {rotation_from_quat_scaled(a.real), 2.0 * dmat(a.real) * a.dual.coeffs() / n2};
}

Mat68 h_body(const DualQuaternion& a) {
  const Mat34 e = emat(a.real);
  Mat68 h = Mat68::Zero();
  h.topLeftCorner<3, 4>() = 2.0 * e;
  h.bottomLeftCorner<3, 4>() = -2.0 * e * dmat(a.real).transpose() * dmat(a.dual);
  h.bottomRightCorner<3, 4>() = 2.0 * e;
  return h;
}

Mat68 h_mixed(const DualQuaternion& a) {
  Mat68 h = Mat68::Zero();
  h.topLeftCorner<3, 4>() = 2.0 * emat(a.real);
  h.bottomLeftCorner<3, 4>() = -2.0 * dmat(a.dual);
  h.bottomRightCorner<3, 4>() = 2.0 * dmat(a.real);
  return h;
}

Mat67 h_euler_params(const Quaternion& q, const Vec3& /*r*/) {
  Mat67 h = Mat67::Zero();
  h.topLeftCorner<3, 4>() = 2.0 * emat(q);
  h.bottomRightCorner<3, 3>() = Mat3::Identity();
  return h;
}

Vec8 reconstruct_rates(const DualQuaternion& a, const Vec6& velocity, VelocityFrame frame) {
  // Rows 0-5: H * rates = V. Row 6: d/dt |Q|^2 / 2 = 0. Row 7: d/dt (Q . Q_eps) = 0.
  Eigen::Matrix<double, 8, 8> m = Eigen::Matrix<double, 8, 8>::Zero();
  m.topRows<6>() = frame == VelocityFrame::Body ? h_body(a) : h_mixed(a);
  m.block<1, 4>(6, 0) = a.real.coeffs().transpose();
  m.block<1, 4>(7, 0) = a.dual.coeffs().transpose();
  m.block<1, 4>(7, 4) = a.real.coeffs().transpose();
  Vec8 rhs = Vec8::Zero();
  rhs.head<6>() = velocity;
  return m.partialPivLu().solve(rhs);
}

Vec7 reconstruct_euler_rates(const Quaternion& q, const Vec3& r, const Vec6& mixed_velocity) {
  Eigen::Matrix<double, 7, 7> m = Eigen::Matrix<double, 7, 7>::Zero();
  m.topRows<6>() = h_euler_params(q, r);
  m.block<1, 4>(6, 0) = q.coeffs().transpose();
  Vec7 rhs = Vec7::Zero();
  rhs.head<6>() = mixed_velocity;
  return m.partialPivLu().solve(rhs);
}

double unit_residual(const Quaternion& q) { return std::abs(q.norm() - 1.0); }

double plucker_residual(const DualQuaternion& a) { return std::abs(a.real.dot(a.dual)); }

}  // namespace geomdyn
