#include "geomdyn/liealg.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace geomdyn {

namespace {

constexpr double kPi = std::numbers::pi;

// Even power series c0 + c2 x^2 + ... + c8 x^8, evaluated in x^2.
struct EvenSeries {
  double c0, c2, c4, c6, c8;
  double operator()(double x) const {
    const double x2 = x * x;
    return c0 + x2 * (c2 + x2 * (c4 + x2 * (c6 + x2 * c8)));
  }
};

// Switch points between Taylor and closed forms. Each coefficient function
// switches where its closed form stops losing digits to cancellation; the
// degree-8 Taylor polynomials are accurate to roundoff well past each switch.
constexpr double kSwitchPlain = 1e-4;   // sin x/x, (1-cos x)/x^2
constexpr double kSwitchCubic = 1e-3;   // (x-sin x)/x^3, cot-based so(3) term
constexpr double kSwitchQuartic = 0.1;  // pitch and ad^4 coefficients

constexpr EvenSeries kSincSeries{1.0, -1.0 / 6, 1.0 / 120, -1.0 / 5040, 1.0 / 362880};
constexpr EvenSeries kOneMinusCosSeries{0.5, -1.0 / 24, 1.0 / 720, -1.0 / 40320,
                                        1.0 / 3628800};
constexpr EvenSeries kXMinusSinSeries{1.0 / 6, -1.0 / 120, 1.0 / 5040, -1.0 / 362880,
                                      1.0 / 39916800};
constexpr EvenSeries kDexpinvSeries{1.0 / 12, 1.0 / 720, 1.0 / 30240, 1.0 / 1209600,
                                    1.0 / 47900160};
constexpr EvenSeries kPitchLinSeries{-1.0 / 12, 1.0 / 180, -1.0 / 6720, 1.0 / 453600,
                                     -1.0 / 47900160};
constexpr EvenSeries kPitchQuadSeries{-1.0 / 60, 1.0 / 1260, -1.0 / 60480, 1.0 / 4989600,
                                      -1.0 / 622702080};
constexpr EvenSeries kParkPitchSeries{1.0 / 360, 1.0 / 7560, 1.0 / 201600, 1.0 / 5987520,
                                      691.0 / 130767436800.0};
constexpr EvenSeries kSeligSquareSeries{1.0 / 12, 0.0, -1.0 / 30240, -1.0 / 604800,
                                        -1.0 / 15966720};
constexpr EvenSeries kSeligQuarticSeries{-1.0 / 720, -1.0 / 15120, -1.0 / 403200,
                                         -1.0 / 11975040, -691.0 / 261534873600.0};

// sin x / x
double sinc(double x) { return x < kSwitchPlain ? kSincSeries(x) : std::sin(x) / x; }

// (1 - cos x) / x^2, via the half-angle identity to avoid cancellation.
double one_minus_cos(double x) {
  if (x < kSwitchPlain) return kOneMinusCosSeries(x);
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (x * x);
}

// (x - sin x) / x^3
double x_minus_sin(double x) {
  return x < kSwitchCubic ? kXMinusSinSeries(x) : (x - std::sin(x)) / (x * x * x);
}

// (1 - (x/2) cot(x/2)) / x^2
double dexpinv_coeff(double x) {
  if (x < kSwitchCubic) return kDexpinvSeries(x);
  const double h = 0.5 * x;
  return (1.0 - h / std::tan(h)) / (x * x);
}

// (alpha - beta) / x^2 with alpha = sin x/x, beta = 2(1-cos x)/x^2
double pitch_lin(double x) {
  if (x < kSwitchQuartic) return kPitchLinSeries(x);
  return (sinc(x) - 2.0 * one_minus_cos(x)) / (x * x);
}

// (beta/2 - 3(1-alpha)/x^2) / x^2
double pitch_quad(double x) {
  if (x < kSwitchQuartic) return kPitchQuadSeries(x);
  return (one_minus_cos(x) - 3.0 * x_minus_sin(x)) / (x * x);
}

// (1/beta + gamma - 2) / x^4 with gamma = (x/2) cot(x/2)
double park_pitch(double x) {
  if (x < kSwitchQuartic) return kParkPitchSeries(x);
  const double h = 0.5 * x;
  const double s = std::sin(h);
  const double inv_beta = h * h / (s * s);
  const double gamma = h / std::tan(h);
  return (inv_beta + gamma - 2.0) / (x * x * x * x);
}

double selig_square(double x) {
  if (x < kSwitchQuartic) return kSeligSquareSeries(x);
  return 2.0 / (x * x) + (x + 3.0 * std::sin(x)) / (4.0 * x * (std::cos(x) - 1.0));
}

double selig_quartic(double x) {
  if (x < kSwitchQuartic) return kSeligQuarticSeries(x);
  return 1.0 / (x * x * x * x) + (x + std::sin(x)) / (4.0 * x * x * x * (std::cos(x) - 1.0));
}

void check_pole(double angle) {
  if (!(angle < 2.0 * kPi - kBranchCutMargin)) {
    throw DomainError("dexpinv: rotation angle " + std::to_string(angle) +
                      " at or beyond the 2*pi pole");
  }
}

}  // namespace

Mat3 hat3(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee3(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat4 hat_se3(const ScrewCoords& x) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat3(rot_part(x));
  m.topRightCorner<3, 1>() = lin_part(x);
  return m;
}

ScrewCoords vee_se3(const Mat4& m) {
  return stack(vee3(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>());
}

Mat3 so3_exp(const Vec3& xi) {
  const double x = xi.norm();
  const Mat3 k = hat3(xi);
  return Mat3::Identity() + sinc(x) * k + one_minus_cos(x) * k * k;
}

Mat3 so3_exp_minus_identity(const Vec3& xi) {
  const double x = xi.norm();
  const Mat3 k = hat3(xi);
  return sinc(x) * k + one_minus_cos(x) * k * k;
}

Vec3 so3_log(const Mat3& R) {
  const Vec3 w = 0.5 * vee3(R - R.transpose());  // sin(angle) * axis
  const double s = w.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  const double angle = std::atan2(s, c);
  if (angle >= kPi - kBranchCutMargin) {
    throw DomainError("so3_log: rotation angle " + std::to_string(angle) +
                      " within branch-cut margin of pi");
  }
  if (angle < kSwitchPlain) {
    // angle / sin(angle)
    const double a2 = angle * angle;
    return w * (1.0 + a2 / 6.0 + 7.0 * a2 * a2 / 360.0);
  }
  return w * (angle / s);
}

Mat3 so3_dexp(const Vec3& xi) {
  const double x = xi.norm();
  const Mat3 k = hat3(xi);
  return Mat3::Identity() + one_minus_cos(x) * k + x_minus_sin(x) * k * k;
}

Mat3 so3_dexpinv(const Vec3& xi) {
  const double x = xi.norm();
  check_pole(x);
  const Mat3 k = hat3(xi);
  return Mat3::Identity() - 0.5 * k + dexpinv_coeff(x) * k * k;
}

Pose se3_exp(const ScrewCoords& x) {
  const Vec3 xi = rot_part(x);
  return {so3_exp(xi), so3_dexp(xi) * lin_part(x)};
}

ScrewCoords se3_log(const Pose& c) {
  const Vec3 xi = so3_log(c.R);
  return stack(xi, so3_dexpinv(xi) * c.r);
}

Mat6 se3_ad(const ScrewCoords& x) {
  Mat6 m = Mat6::Zero();
  const Mat3 k = hat3(rot_part(x));
  m.topLeftCorner<3, 3>() = k;
  m.bottomRightCorner<3, 3>() = k;
  m.bottomLeftCorner<3, 3>() = hat3(lin_part(x));
  return m;
}

Mat6 se3_dexp(const ScrewCoords& x) {
  const Vec3 xi = rot_part(x);
  const Vec3 eta = lin_part(x);
  const double ang = xi.norm();
  const Mat3 k = hat3(xi);
  const Mat3 e = hat3(eta);
  const double pitch = xi.dot(eta);

  const Mat3 p = one_minus_cos(ang) * e + x_minus_sin(ang) * (e * k + k * e) +
                 pitch * pitch_lin(ang) * k + pitch * pitch_quad(ang) * k * k;
  Mat6 m = Mat6::Zero();
  const Mat3 d = so3_dexp(xi);
  m.topLeftCorner<3, 3>() = d;
  m.bottomRightCorner<3, 3>() = d;
  m.bottomLeftCorner<3, 3>() = p;
  return m;
}

Mat6 se3_dexpinv(const ScrewCoords& x) {
  const Vec3 xi = rot_part(x);
  const Vec3 eta = lin_part(x);
  const double ang = xi.norm();
  check_pole(ang);
  const Mat3 k = hat3(xi);
  const Mat3 e = hat3(eta);

  const Mat3 u = dexpinv_coeff(ang) * (e * k + k * e) +
                 xi.dot(eta) * park_pitch(ang) * k * k - 0.5 * e;
  Mat6 m = Mat6::Zero();
  const Mat3 d = so3_dexpinv(xi);
  m.topLeftCorner<3, 3>() = d;
  m.bottomRightCorner<3, 3>() = d;
  m.bottomLeftCorner<3, 3>() = u;
  return m;
}

Mat6 se3_dexpinv_selig(const ScrewCoords& x) {
  const double ang = rot_part(x).norm();
  check_pole(ang);
  const Mat6 a = se3_ad(x);
  const Mat6 a2 = a * a;
  return Mat6::Identity() - 0.5 * a + selig_square(ang) * a2 + selig_quartic(ang) * a2 * a2;
}

Pose se3_compose(const Pose& a, const Pose& b) { return {a.R * b.R, a.r + a.R * b.r}; }

Pose se3_inverse(const Pose& c) {
  const Mat3 rt = c.R.transpose();
  return {rt, -(rt * c.r)};
}

Pose dp_compose(const Pose& a, const Pose& b) { return {a.R * b.R, a.r + b.r}; }

Pose dp_inverse(const Pose& c) { return {c.R.transpose(), -c.r}; }

Pose dp_exp(const ScrewCoords& x) { return {so3_exp(rot_part(x)), lin_part(x)}; }

ScrewCoords dp_log(const Pose& c) { return stack(so3_log(c.R), c.r); }

Mat6 dp_ad(const ScrewCoords& x) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = hat3(rot_part(x));
  return m;
}

Mat6 dp_dexp(const ScrewCoords& x) {
  Mat6 m = Mat6::Identity();
  m.topLeftCorner<3, 3>() = so3_dexp(rot_part(x));
  return m;
}

Mat6 dp_dexpinv(const ScrewCoords& x) {
  Mat6 m = Mat6::Identity();
  m.topLeftCorner<3, 3>() = so3_dexpinv(rot_part(x));
  return m;
}

Mat6 dexpinv_second_order(const Mat6& ad) {
  return Mat6::Identity() - 0.5 * ad + (1.0 / 12.0) * ad * ad;
}

Mat6 mixed_twist_matrix(const ScrewCoords& x) {
  Mat6 m = se3_dexp(-x);
  m.bottomRows<3>() = so3_exp(rot_part(x)) * m.bottomRows<3>();
  return m;
}

Mat3 three_angle_rates_matrix(const std::array<Vec3, 3>& axes, const Vec3& angles) {
  const Mat3 rj = so3_exp(axes[1] * angles[1]);
  const Mat3 rk = so3_exp(axes[2] * angles[2]);
  Mat3 b;
  b.col(0) = rk.transpose() * rj.transpose() * axes[0];
  b.col(1) = rk.transpose() * axes[1];
  b.col(2) = axes[2];
  return b;
}

Pose renormalize(const Pose& c) {
  Eigen::JacobiSVD<Mat3> svd(c.R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return {u * v.transpose(), c.r};
}

double orthogonality_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

double rotation_distance(const Mat3& a, const Mat3& b) {
  return so3_log(a.transpose() * b).norm();
}

Mat6 SE3Group::dexpinv(const ScrewCoords& x) const {
  if (mode_ == DexpinvMode::SecondOrderSeries) return dexpinv_second_order(se3_ad(x));
  return se3_dexpinv(x);
}

Mat6 DirectProductGroup::dexpinv(const ScrewCoords& x) const {
  if (mode_ == DexpinvMode::SecondOrderSeries) return dexpinv_second_order(dp_ad(x));
  return dp_dexpinv(x);
}

std::unique_ptr<CSpaceGroup> make_group(GroupKind kind, DexpinvMode mode) {
  if (kind == GroupKind::SE3) return std::make_unique<SE3Group>(mode);
  return std::make_unique<DirectProductGroup>(mode);
}

const char* group_name(GroupKind kind) {
  return kind == GroupKind::SE3 ? "se3" : "so3xr3";
}

GroupKind parse_group(const std::string& name) {
  if (name == "se3") return GroupKind::SE3;
  if (name == "so3xr3") return GroupKind::SO3xR3;
  throw Error("unknown group '" + name + "' (expected se3 or so3xr3)");
}

}  // namespace geomdyn
