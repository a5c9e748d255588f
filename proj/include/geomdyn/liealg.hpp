#pragma once

#include "geomdyn/types.hpp"

#include <array>
#include <memory>

namespace geomdyn {

// Angular distance to the log branch cut / dexpinv pole below which inputs
// are rejected.
inline constexpr double kBranchCutMargin = 1e-6;

Mat3 hat3(const Vec3& v);
Vec3 vee3(const Mat3& m);
// 4x4 matrix form of screw coordinates (xi_hat, eta; 0, 0).
Mat4 hat_se3(const ScrewCoords& x);
ScrewCoords vee_se3(const Mat4& m);

// --- SO(3) ---
Mat3 so3_exp(const Vec3& xi);
// exp(xi) - I without rounding against the identity, for accumulating
// many small rotations.
Mat3 so3_exp_minus_identity(const Vec3& xi);
// Throws DomainError within kBranchCutMargin of pi.
Vec3 so3_log(const Mat3& R);
// Right-trivialized differential: omega = so3_dexp(-xi) * xi_dot.
Mat3 so3_dexp(const Vec3& xi);
// Throws DomainError within kBranchCutMargin of 2*pi.
Mat3 so3_dexpinv(const Vec3& xi);

// --- SE(3) ---
Pose se3_exp(const ScrewCoords& x);
ScrewCoords se3_log(const Pose& c);
Mat6 se3_ad(const ScrewCoords& x);
Mat6 se3_dexp(const ScrewCoords& x);
// Block form with lower-left U block.
Mat6 se3_dexpinv(const ScrewCoords& x);
// Alternative closed form as a polynomial in ad_X of degree four; used as an
// independent cross-check of se3_dexpinv.
Mat6 se3_dexpinv_selig(const ScrewCoords& x);
// Matrix product a*b of homogeneous transforms.
Pose se3_compose(const Pose& a, const Pose& b);
Pose se3_inverse(const Pose& c);

// --- SO(3) x R^3 ---
// (Ra*Rb, ra + rb): translations add without rotation coupling.
Pose dp_compose(const Pose& a, const Pose& b);
Pose dp_inverse(const Pose& c);
Pose dp_exp(const ScrewCoords& x);
ScrewCoords dp_log(const Pose& c);
Mat6 dp_ad(const ScrewCoords& x);
Mat6 dp_dexp(const ScrewCoords& x);
Mat6 dp_dexpinv(const ScrewCoords& x);

// I - ad/2 + ad^2/12, the truncated series of dexpinv.
Mat6 dexpinv_second_order(const Mat6& ad);

// Maps SE(3) coordinate rates to mixed velocity: blockdiag(I, R) * dexp(-X).
Mat6 mixed_twist_matrix(const ScrewCoords& x);

// Body angular velocity omega = B * theta_dot for R = R_i R_j R_k with
// R_n = exp(hat(axis_n) * angle_n).
Mat3 three_angle_rates_matrix(const std::array<Vec3, 3>& axes, const Vec3& angles);

// Projects R onto SO(3) (polar decomposition). Never applied implicitly.
Pose renormalize(const Pose& c);
double orthogonality_error(const Mat3& R);
// |log(a^T b)|.
double rotation_distance(const Mat3& a, const Mat3& b);

enum class DexpinvMode {
  ClosedForm,
  // Truncated series; only meant for mutation testing of the verify suite.
  SecondOrderSeries,
};

class CSpaceGroup {
 public:
  virtual ~CSpaceGroup() = default;
  virtual GroupKind kind() const = 0;
  virtual Pose compose(const Pose& a, const Pose& b) const = 0;
  virtual Pose inverse(const Pose& c) const = 0;
  virtual Pose exp(const ScrewCoords& x) const = 0;
  virtual ScrewCoords log(const Pose& c) const = 0;
  virtual Mat6 dexp(const ScrewCoords& x) const = 0;
  virtual Mat6 dexpinv(const ScrewCoords& x) const = 0;
  virtual Mat6 ad(const ScrewCoords& x) const = 0;
};

class SE3Group final : public CSpaceGroup {
 public:
  explicit SE3Group(DexpinvMode mode = DexpinvMode::ClosedForm) : mode_(mode) {}
  GroupKind kind() const override { return GroupKind::SE3; }
  Pose compose(const Pose& a, const Pose& b) const override { return se3_compose(a, b); }
  Pose inverse(const Pose& c) const override { return se3_inverse(c); }
  Pose exp(const ScrewCoords& x) const override { return se3_exp(x); }
  ScrewCoords log(const Pose& c) const override { return se3_log(c); }
  Mat6 dexp(const ScrewCoords& x) const override { return se3_dexp(x); }
  Mat6 dexpinv(const ScrewCoords& x) const override;
  Mat6 ad(const ScrewCoords& x) const override { return se3_ad(x); }

 private:
  DexpinvMode mode_;
};

class DirectProductGroup final : public CSpaceGroup {
 public:
  explicit DirectProductGroup(DexpinvMode mode = DexpinvMode::ClosedForm) : mode_(mode) {}
  GroupKind kind() const override { return GroupKind::SO3xR3; }
  Pose compose(const Pose& a, const Pose& b) const override { return dp_compose(a, b); }
  Pose inverse(const Pose& c) const override { return dp_inverse(c); }
  Pose exp(const ScrewCoords& x) const override { return dp_exp(x); }
  ScrewCoords log(const Pose& c) const override { return dp_log(c); }
  Mat6 dexp(const ScrewCoords& x) const override { return dp_dexp(x); }
  Mat6 dexpinv(const ScrewCoords& x) const override;
  Mat6 ad(const ScrewCoords& x) const override { return dp_ad(x); }

 private:
  DexpinvMode mode_;
};

std::unique_ptr<CSpaceGroup> make_group(GroupKind kind,
                                        DexpinvMode mode = DexpinvMode::ClosedForm);
const char* group_name(GroupKind kind);
GroupKind parse_group(const std::string& name);

}  // namespace geomdyn
