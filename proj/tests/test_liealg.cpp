#include "geomdyn/liealg.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace geomdyn;
using oracle::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const auto& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Hat, CrossProduct) {
  EXPECT_EQ(max_abs(hat3(Vec3::Zero())), 0.0);
  EXPECT_TRUE((hat3(Vec3::UnitZ()) * Vec3::UnitX()).isApprox(Vec3::UnitY()));
  EXPECT_TRUE((hat3(Vec3(1, 2, 3)) * Vec3(4, 5, 6)).isApprox(Vec3(-3, 6, -3)));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = rng.vec3(), b = rng.vec3();
    EXPECT_LT((hat3(a) * b - a.cross(b)).norm(), 1e-15);
    EXPECT_LT(max_abs(hat3(a) + hat3(a).transpose()), 1e-300);
    EXPECT_EQ(vee3(hat3(a)), a);
  }
}

TEST(So3Exp, Examples) {
  EXPECT_EQ(so3_exp(Vec3::Zero()), Mat3::Identity());
  Mat3 quarter;
  quarter << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT(max_abs(so3_exp(Vec3(0, 0, kPi / 2)) - quarter), 1e-15);
}

TEST(So3Exp, MatchesMatrixExponential) {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const Vec3 xi = rng.unit3() * rng.uniform(0.1, 3.0);
    const Mat3 ref = oracle::expm(Mat3(oracle::cross_matrix(xi)));
    EXPECT_LT(max_abs(so3_exp(xi) - ref), 1e-12);
  }
}

TEST(So3Exp, OrthogonalAndRoundtrip) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Vec3 xi = rng.unit3() * rng.uniform(0.0, kPi - 1e-3);
    const Mat3 R = so3_exp(xi);
    EXPECT_LT(max_abs(R.transpose() * R - Mat3::Identity()), 1e-12);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-12);
    EXPECT_LT((so3_log(R) - xi).norm(), 1e-10);
  }
}

TEST(So3Exp, MinusIdentityKeepsSmallEntries) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec3 xi = rng.vec3() * (i % 2 == 0 ? 1.0 : 1e-7);
    EXPECT_LT(max_abs(so3_exp_minus_identity(xi) + Mat3::Identity() - so3_exp(xi)), 2e-16);
  }
  // relative accuracy survives where exp(xi) - I would cancel
  const Vec3 tiny(0, 0, 1e-9);
  const Mat3 d = so3_exp_minus_identity(tiny);
  EXPECT_NEAR(d(1, 0), std::sin(1e-9), 1e-25);
  EXPECT_NEAR(d(0, 0), -0.5e-18, 1e-34);
}

TEST(So3Log, Examples) {
  EXPECT_EQ(so3_log(Mat3::Identity()), Vec3::Zero());
  const Vec3 xi(0.3, -0.2, 0.1);
  EXPECT_LT((so3_log(so3_exp(xi)) - xi).norm(), 1e-12);
  EXPECT_LT((so3_log(so3_exp(Vec3(3.0, 0, 0))) - Vec3(3.0, 0, 0)).norm(), 1e-12);
}

TEST(So3Log, RejectsBranchCut) {
  EXPECT_THROW(so3_log(so3_exp(Vec3(kPi, 0, 0))), DomainError);
  EXPECT_THROW(so3_log(so3_exp(Vec3(0, kPi - 1e-8, 0))), DomainError);
  EXPECT_NO_THROW(so3_log(so3_exp(Vec3(0, kPi - 1e-4, 0))));
}

TEST(So3Dexp, Examples) {
  EXPECT_EQ(so3_dexp(Vec3::Zero()), Mat3::Identity());
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 xi = rng.vec3(1.5);
    EXPECT_LT((so3_dexp(xi) * xi - xi).norm(), 1e-14);
  }
}

TEST(So3Dexp, MatchesSeries) {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const Vec3 xi = rng.unit3() * rng.uniform(0.0, 1.0);
    const Mat3 ref = oracle::dexp_series(Mat3(oracle::cross_matrix(xi)));
    EXPECT_LT(max_abs(so3_dexp(xi) - ref), 1e-10);
  }
}

TEST(So3Dexp, RightTrivializedConvention) {
  // omega from finite differences of exp(xi(t)) equals dexp(-xi) xi_dot.
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Vec3 xi = rng.vec3(0.8), rate = rng.vec3();
    const double h = 1e-6;
    const Mat3 R = so3_exp(xi);
    const Mat3 dR = (so3_exp(xi + h * rate) - so3_exp(xi - h * rate)) / (2 * h);
    const Vec3 omega = vee3(R.transpose() * dR);
    EXPECT_LT((omega - so3_dexp(-xi) * rate).norm(), 1e-8);
  }
}

TEST(So3Dexpinv, InverseAndApproximation) {
  EXPECT_EQ(so3_dexpinv(Vec3::Zero()), Mat3::Identity());
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Vec3 xi = rng.unit3() * rng.uniform(1e-3, kPi);
    EXPECT_LT(max_abs(so3_dexpinv(xi) * so3_dexp(xi) - Mat3::Identity()), 1e-12);
  }
  // Second-order approximation error shrinks like |xi|^4.
  const Vec3 axis = rng.unit3();
  double prev = 0.0;
  for (double s : {0.2, 0.1, 0.05}) {
    const Vec3 xi = axis * s;
    const Mat3 k = hat3(xi);
    const Mat3 approx = Mat3::Identity() - 0.5 * k + k * k / 12.0;
    const double err = max_abs(so3_dexpinv(xi) - approx);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 16.0, 1.0);
    prev = err;
  }
}

TEST(So3Dexpinv, RejectsPole) {
  EXPECT_THROW(so3_dexpinv(Vec3(2 * kPi, 0, 0)), DomainError);
  EXPECT_THROW(se3_dexpinv(stack(Vec3(0, 0, 7.0), Vec3::Zero())), DomainError);
  EXPECT_NO_THROW(so3_dexpinv(Vec3(2 * kPi - 1e-3, 0, 0)));
}

TEST(Se3Exp, Examples) {
  const Pose id = se3_exp(Vec6::Zero());
  EXPECT_EQ(id.R, Mat3::Identity());
  EXPECT_EQ(id.r, Vec3::Zero());
  const Pose tr = se3_exp(stack(Vec3::Zero(), Vec3(1, 2, 3)));
  EXPECT_EQ(tr.R, Mat3::Identity());
  EXPECT_EQ(tr.r, Vec3(1, 2, 3));
}

TEST(Se3Exp, MatchesMatrixExponential) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Vec6 x = rng.screw(0.0, 3.0);
    const Mat4 ref = oracle::expm(oracle::screw_matrix(x));
    EXPECT_LT(max_abs(se3_exp(x).homogeneous() - ref), 1e-12);
  }
}

TEST(Se3Log, Roundtrip) {
  const Vec6 zero = se3_log(Pose::identity());
  EXPECT_EQ(zero, Vec6::Zero());
  const Vec6 tr = se3_log(Pose{Mat3::Identity(), Vec3(0.5, 0, 0)});
  EXPECT_LT((tr - stack(Vec3::Zero(), Vec3(0.5, 0, 0))).norm(), 1e-15);
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const Vec6 x = rng.screw(0.0, 3.0);
    EXPECT_LT((se3_log(se3_exp(x)) - x).norm(), 1e-10);
    const Pose c = rng.pose();
    EXPECT_LT(oracle::pose_error(se3_exp(se3_log(c)), c), 1e-10);
  }
}

TEST(Se3Ad, BracketAndCommutator) {
  EXPECT_EQ(se3_ad(Vec6::Zero()), Mat6::Zero());
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const Vec6 a = rng.vec6(), b = rng.vec6(), c = rng.vec6();
    EXPECT_LT((se3_ad(a) * a).norm(), 1e-15);
    const Vec6 br = se3_ad(a) * b;
    const Vec3 expect_rot = rot_part(a).cross(rot_part(b));
    const Vec3 expect_lin = rot_part(a).cross(lin_part(b)) - rot_part(b).cross(lin_part(a));
    EXPECT_LT((rot_part(br) - expect_rot).norm(), 1e-14);
    EXPECT_LT((lin_part(br) - expect_lin).norm(), 1e-14);
    const Mat4 ha = oracle::screw_matrix(a), hb = oracle::screw_matrix(b);
    EXPECT_LT(max_abs(ha * hb - hb * ha - hat_se3(br)), 1e-13);
    // Jacobi identity
    const Vec6 jac = se3_ad(a) * (se3_ad(b) * c) + se3_ad(b) * (se3_ad(c) * a) +
                     se3_ad(c) * (se3_ad(a) * b);
    EXPECT_LT(jac.norm(), 1e-12);
  }
}

TEST(Se3Dexp, MatchesSeries) {
  EXPECT_EQ(se3_dexp(Vec6::Zero()), Mat6::Identity());
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const Vec6 x = rng.vec6().normalized() * rng.uniform(0.0, 1.0);
    const Mat6 ref = oracle::dexp_series(oracle::ad_matrix(x));
    EXPECT_LT(max_abs(se3_dexp(x) - ref), 1e-10);
  }
}

TEST(Se3Dexp, PureRotationHasNoPitchTerms) {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const Vec3 xi = rng.unit3() * rng.uniform(0.1, 0.7);
    // eta orthogonal to xi gives zero pitch
    Vec3 eta = rng.vec3();
    eta -= xi * (xi.dot(eta) / xi.squaredNorm());
    const Vec6 x = stack(xi, eta.normalized() * 0.7);
    const Mat6 ref = oracle::dexp_series(oracle::ad_matrix(x));
    EXPECT_LT(max_abs(se3_dexp(x) - ref), 1e-10);
  }
}

TEST(Se3Dexp, BodyTwistConvention) {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const Vec6 x = rng.screw(0.0, 2.0), rate = rng.vec6();
    const double h = 1e-6;
    const Mat4 c = se3_exp(x).homogeneous();
    const Mat4 dc = (se3_exp(x + h * rate).homogeneous() - se3_exp(x - h * rate).homogeneous()) /
                    (2 * h);
    const Vec6 v = vee_se3(c.inverse() * dc);
    EXPECT_LT((v - se3_dexp(-x) * rate).norm(), 1e-7);
  }
}

TEST(Se3Dexpinv, InverseAndSelig) {
  EXPECT_EQ(se3_dexpinv(Vec6::Zero()), Mat6::Identity());
  Rng rng(14);
  for (int i = 0; i < 2000; ++i) {
    const Vec6 x = rng.screw(1e-6, 2 * kPi - 0.1);
    const Mat6 inv = se3_dexpinv(x);
    EXPECT_LT(max_abs(inv * se3_dexp(x) - Mat6::Identity()), 1e-12) << x.transpose();
    EXPECT_LT(max_abs(inv - se3_dexpinv_selig(x)), 1e-10) << x.transpose();
  }
}

TEST(Se3Dexpinv, FixesOwnDirection) {
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    const Vec6 x = rng.screw(0.0, 3.0);
    EXPECT_LT((se3_dexp(x) * x - x).norm(), 1e-13);
    EXPECT_LT((se3_dexpinv(x) * x - x).norm(), 1e-13);
  }
}

TEST(SmallAngle, BranchContinuity) {
  // Around each switch point the two branches must agree at operator level.
  Rng rng(16);
  for (double sw : {1e-4, 1e-3, 0.1}) {
    for (int i = 0; i < 200; ++i) {
      const Vec3 axis = rng.unit3();
      const Vec3 eta = rng.vec3();
      const double below = sw * (1.0 - 1e-9), above = sw * (1.0 + 1e-9);
      const Vec6 lo = stack(axis * below, eta), hi = stack(axis * above, eta);
      // difference across the switch minus the true change over the gap
      auto jump = [&](auto f) {
        const Mat6 mid = f(stack(axis * sw, eta));
        return max_abs((f(hi) - mid) - (mid - f(lo)));
      };
      EXPECT_LT(jump([](const Vec6& v) { return se3_dexp(v); }), 1e-12);
      EXPECT_LT(jump([](const Vec6& v) { return se3_dexpinv(v); }), 1e-12);
      EXPECT_LT(jump([](const Vec6& v) { return se3_dexpinv_selig(v); }), 1e-12);
    }
  }
  // Over the overlap band every branch matches the series/inverse oracles.
  for (double sw : {1e-4, 1e-3, 0.1}) {
    for (int i = 0; i < 200; ++i) {
      const Vec6 x = stack(rng.unit3() * rng.uniform(sw / 2, 2 * sw), rng.vec3());
      const Mat6 ref = oracle::dexp_series(oracle::ad_matrix(x), 14);
      EXPECT_LT(max_abs(se3_dexp(x) - ref), 1e-12);
      const Mat6 refinv = ref.inverse();
      EXPECT_LT(max_abs(se3_dexpinv(x) - refinv), 1e-12);
      EXPECT_LT(max_abs(so3_exp(rot_part(x)) -
                        oracle::expm(Mat3(oracle::cross_matrix(rot_part(x))))),
                1e-12);
    }
  }
}

TEST(Se3Compose, Examples) {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Pose a = rng.pose(), b = rng.pose();
    EXPECT_LT(oracle::pose_error(se3_compose(a, Pose::identity()), a), 1e-300);
    EXPECT_LT(oracle::pose_error(se3_compose(a, se3_inverse(a)), Pose::identity()), 1e-13);
    const Mat4 ref = a.homogeneous() * b.homogeneous();
    EXPECT_LT(max_abs(se3_compose(a, b).homogeneous() - ref), 1e-14);
    const Pose ab = se3_compose(a, b);
    EXPECT_EQ(ab.r, a.r + a.R * b.r);
  }
}

TEST(DpCompose, Examples) {
  const Pose a{so3_exp(Vec3(0, 0, kPi / 2)), Vec3(1, 0, 0)};
  const Pose b{Mat3::Identity(), Vec3(0, 1, 0)};
  EXPECT_EQ(dp_compose(a, b).r, Vec3(1, 1, 0));
  Rng rng(18);
  for (int i = 0; i < 100; ++i) {
    const Pose p = rng.pose(), q = rng.pose();
    EXPECT_LT(oracle::pose_error(dp_compose(p, Pose::identity()), p), 1e-300);
    EXPECT_LT(oracle::pose_error(dp_compose(p, dp_inverse(p)), Pose::identity()), 1e-14);
    // 7x7 representation blockdiag(R, [I r; 0 1])
    auto rep = [](const Pose& c) {
      Eigen::Matrix<double, 7, 7> m = Eigen::Matrix<double, 7, 7>::Identity();
      m.topLeftCorner<3, 3>() = c.R;
      m.block<3, 1>(3, 6) = c.r;
      return m;
    };
    EXPECT_LT(max_abs(rep(dp_compose(p, q)) - rep(p) * rep(q)), 1e-14);
    EXPECT_EQ(dp_compose(p, q).r, p.r + q.r);
  }
}

TEST(DpExp, ExamplesAndRoundtrip) {
  EXPECT_EQ(dp_exp(Vec6::Zero()).R, Mat3::Identity());
  const Pose t = dp_exp(stack(Vec3::Zero(), Vec3(1, 2, 3)));
  EXPECT_EQ(t.R, Mat3::Identity());
  EXPECT_EQ(t.r, Vec3(1, 2, 3));
  Rng rng(19);
  for (int i = 0; i < 200; ++i) {
    const Vec6 x = rng.screw(0.0, 3.0);
    EXPECT_LT((dp_log(dp_exp(x)) - x).norm(), 1e-10);
  }
}

TEST(DpDexpinv, Structure) {
  EXPECT_EQ(dp_dexpinv(Vec6::Zero()), Mat6::Identity());
  Rng rng(20);
  for (int i = 0; i < 100; ++i) {
    const Vec6 x = rng.screw(0.0, 3.0), y = rng.vec6();
    const Mat6 m = dp_dexpinv(x);
    EXPECT_EQ(Mat3(m.bottomRightCorner<3, 3>()), Mat3::Identity());
    EXPECT_EQ(Mat3(m.topRightCorner<3, 3>()), Mat3::Zero());
    EXPECT_EQ(Mat3(m.bottomLeftCorner<3, 3>()), Mat3::Zero());
    EXPECT_LT(max_abs(m * dp_dexp(x) - Mat6::Identity()), 1e-12);
    const Vec6 br = dp_ad(x) * y;
    EXPECT_LT((rot_part(br) - rot_part(x).cross(rot_part(y))).norm(), 1e-14);
    EXPECT_EQ(lin_part(br), Vec3::Zero());
  }
}

TEST(MixedTwist, Definition) {
  EXPECT_LT(max_abs(mixed_twist_matrix(Vec6::Zero()) - Mat6::Identity()), 1e-300);
  // At xi = 0 the coordinate chart still couples rotation rates into the
  // translation through eta, so only the diagonal blocks are identity.
  const Vec3 eta(1, -2, 3);
  Mat6 expect = Mat6::Identity();
  expect.bottomLeftCorner<3, 3>() = -0.5 * oracle::cross_matrix(eta);
  EXPECT_LT(max_abs(mixed_twist_matrix(stack(Vec3::Zero(), eta)) - expect), 1e-15);
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const Vec6 x = rng.screw(0.0, 3.0);
    Mat6 blk = Mat6::Identity();
    blk.bottomRightCorner<3, 3>() = oracle::expm(Mat3(oracle::cross_matrix(rot_part(x))));
    EXPECT_LT(max_abs(mixed_twist_matrix(x) - blk * se3_dexp(-x)), 1e-12);
    // converts coordinate rates to (body omega, spatial velocity)
    const Vec6 rate = rng.vec6();
    const double h = 1e-6;
    const Pose c = se3_exp(x);
    const Pose cp = se3_exp(x + h * rate), cm = se3_exp(x - h * rate);
    const Vec3 omega = vee3(c.R.transpose() * (cp.R - cm.R) / (2 * h));
    const Vec3 vs = (cp.r - cm.r) / (2 * h);
    EXPECT_LT((stack(omega, vs) - mixed_twist_matrix(x) * rate).norm(), 1e-7);
  }
}

TEST(ThreeAngle, Examples) {
  const std::array<Vec3, 3> zxz{Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitZ()};
  const Mat3 b = three_angle_rates_matrix(zxz, Vec3::Zero());
  EXPECT_EQ(Vec3(b.col(0)), Vec3::UnitZ());
  EXPECT_EQ(Vec3(b.col(1)), Vec3::UnitX());
  EXPECT_EQ(Vec3(b.col(2)), Vec3::UnitZ());
  EXPECT_NEAR(b.determinant(), 0.0, 1e-300);
  const std::array<Vec3, 3> xyz{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  EXPECT_EQ(three_angle_rates_matrix(xyz, Vec3::Zero()), Mat3::Identity());
}

TEST(ThreeAngle, FiniteDifference) {
  const std::array<Vec3, 3> xyz{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  Rng rng(22);
  auto rot = [&](const Vec3& th) {
    Mat3 r = Mat3::Identity();
    for (int k = 0; k < 3; ++k)
      r = r * oracle::expm(Mat3(oracle::cross_matrix(xyz[k] * th[k])));
    return r;
  };
  for (int i = 0; i < 100; ++i) {
    const Vec3 th = rng.vec3(0.7), rate = rng.vec3();
    const double h = 1e-6;
    const Vec3 omega =
        so3_log(rot(th - h * rate).transpose() * rot(th + h * rate)) / (2 * h);
    EXPECT_LT((omega - three_angle_rates_matrix(xyz, th) * rate).norm(), 1e-6);
  }
}

TEST(Renormalize, ProjectsOntoRotations) {
  Rng rng(23);
  Pose p = rng.pose();
  p.R(0, 1) += 1e-6;
  EXPECT_GT(orthogonality_error(p.R), 1e-7);
  const Pose q = renormalize(p);
  EXPECT_LT(orthogonality_error(q.R), 1e-14);
  EXPECT_NEAR(q.R.determinant(), 1.0, 1e-14);
  EXPECT_LT(max_abs(q.R - p.R), 1e-6);
}

TEST(Groups, AxiomsHoldForBoth) {
  Rng rng(24);
  for (auto kind : {GroupKind::SE3, GroupKind::SO3xR3}) {
    const auto g = make_group(kind);
    EXPECT_EQ(g->kind(), kind);
    for (int i = 0; i < 100; ++i) {
      const Pose a = rng.pose(), b = rng.pose(), c = rng.pose();
      EXPECT_LT(oracle::pose_error(g->compose(g->compose(a, b), c),
                                   g->compose(a, g->compose(b, c))),
                1e-13);
      EXPECT_LT(oracle::pose_error(g->compose(a, g->inverse(a)), Pose::identity()), 1e-13);
      const Vec6 x = rng.screw(0.0, 3.0);
      EXPECT_LT((g->log(g->exp(x)) - x).norm(), 1e-10);
      EXPECT_LT(max_abs(g->dexpinv(x) * g->dexp(x) - Mat6::Identity()), 1e-12);
    }
  }
  EXPECT_EQ(parse_group("se3"), GroupKind::SE3);
  EXPECT_EQ(parse_group("so3xr3"), GroupKind::SO3xR3);
  EXPECT_THROW(parse_group("se2"), Error);
}

TEST(Groups, SecondOrderModeDiffersFromClosedForm) {
  const SE3Group exact;
  const SE3Group approx(DexpinvMode::SecondOrderSeries);
  const Vec6 x = stack(Vec3(0.4, -0.2, 0.3), Vec3(0.1, 0.5, -0.3));
  EXPECT_GT((exact.dexpinv(x) - approx.dexpinv(x)).cwiseAbs().maxCoeff(), 1e-6);
  // still exact along its own direction
  EXPECT_LT((approx.dexpinv(x) * x - x).norm(), 1e-15);
}
