#pragma once

// Independent reference computations for the tests. Nothing here calls the
// closed-form kernels under test.

#include "geomdyn/types.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

namespace oracle {

using namespace geomdyn;

inline Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

inline Mat4 screw_matrix(const Vec6& x) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = cross_matrix(x.head<3>());
  m.topRightCorner<3, 1>() = x.tail<3>();
  return m;
}

// Scaling-and-squaring Pade exponential from Eigen's MatrixFunctions module.
template <typename M>
M expm(const M& a) {
  return a.exp();
}

inline Mat6 ad_matrix(const Vec6& x) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = cross_matrix(x.head<3>());
  m.bottomRightCorner<3, 3>() = cross_matrix(x.head<3>());
  m.bottomLeftCorner<3, 3>() = cross_matrix(x.tail<3>());
  return m;
}

// sum_{i<terms} a^i / (i+1)!; the default keeps powers a^0 .. a^12.
template <typename M>
M dexp_series(const M& a, int terms = 13) {
  M sum = M::Zero(a.rows(), a.cols());
  M power = M::Identity(a.rows(), a.cols());
  double fact = 1.0;
  for (int i = 0; i < terms; ++i) {
    fact *= (i + 1);
    sum += power / fact;
    power = power * a;
  }
  return sum;
}

class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<>(0.0, 1.0)(gen_); }
  Vec3 unit3() {
    Vec3 v(normal(), normal(), normal());
    return v.normalized();
  }
  Vec3 vec3(double scale = 1.0) { return scale * Vec3(normal(), normal(), normal()); }
  Vec6 vec6(double scale = 1.0) { return stack(vec3(scale), vec3(scale)); }
  Mat3 rotation() {
    return expm(Mat3(cross_matrix(unit3() * uniform(0.0, 3.0))));
  }
  Pose pose() { return {rotation(), vec3()}; }
  // Screw with rotation angle drawn uniformly from (lo, hi).
  Vec6 screw(double lo, double hi) { return stack(unit3() * uniform(lo, hi), vec3()); }
  std::mt19937& engine() { return gen_; }

 private:
  std::mt19937 gen_;
};

inline double pose_error(const Pose& a, const Pose& b) {
  return std::max((a.R - b.R).cwiseAbs().maxCoeff(), (a.r - b.r).cwiseAbs().maxCoeff());
}

}  // namespace oracle
