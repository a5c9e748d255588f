#include "geomdyn/bench.hpp"

#include "geomdyn/liealg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geomdyn::bench {

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<double> kStepSizes{1e-2, 1e-3, 1e-4};

Mat3 rot(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis).toRotationMatrix(); }

RigidBody aluminium_box(const std::string& name, const Vec3& edges, const Vec3& com = Vec3::Zero()) {
  const double mass = kAluminiumDensity * edges.prod();
  return {name, mass, parallel_axis(box_inertia(mass, edges), mass, com), com, GroupKind::SE3};
}

// Solid cylinder with its axis along body y.
RigidBody aluminium_rod_y(const std::string& name, double length, double radius) {
  const double mass = kAluminiumDensity * kPi * radius * radius * length;
  const double across = mass * (3.0 * radius * radius + length * length) / 12.0;
  const Mat3 inertia = Vec3(across, 0.5 * mass * radius * radius, across).asDiagonal();
  return {name, mass, inertia, Vec3::Zero(), GroupKind::SE3};
}

Joint make_joint(std::string name, JointKind kind, int a, const Vec3& anchor_a, int b,
                 const Vec3& anchor_b, const Vec3& axis_a = Vec3::UnitZ(),
                 const Vec3& axis_b = Vec3::UnitZ()) {
  Joint j;
  j.name = std::move(name);
  j.kind = kind;
  j.body_a = a;
  j.body_b = b;
  j.anchor_a = anchor_a;
  j.anchor_b = anchor_b;
  j.axis_a = axis_a;
  j.axis_b = axis_b;
  return j;
}

// Builders work in body-fixed twists on SE(3), then convert.
Experiment finish(Experiment e, GroupKind group) {
  validate(e.model);
  e.reference.resize(e.model.bodies.size());
  check_consistent(e.model, e.initial, 1e-12, kVelocityTolerance);
  return group == GroupKind::SE3 ? e : retarget(e, group);
}

}  // namespace

Experiment retarget(const Experiment& e, GroupKind group) {
  Experiment out = e;
  out.model = with_group(e.model, group);
  out.initial = convert_state(e.model, e.initial, out.model);
  return out;
}

Experiment model_free_body_com(FreeBodyMotion motion, GroupKind group) {
  Experiment e;
  const bool moving = motion == FreeBodyMotion::RotationTranslation;
  e.id = moving ? "free-body-com-translating" : "free-body-com";
  e.description = moving ? "free box, frame at COM, spin about z while translating along x"
                         : "free box, frame at COM, skew spin with COM at rest";
  e.model.name = e.id;
  // 0.8 x 0.4 x 0.1 m aluminium: 86.4 kg, diag(1.224, 4.68, 5.76)
  e.model.bodies.push_back(aluminium_box("box", Vec3(0.8, 0.4, 0.1)));
  const Vec3 omega = moving ? Vec3(0, 0, 2 * kPi) : Vec3(10 * kPi, 2 * kPi, 0);
  const Vec3 v = moving ? Vec3(10, 0, 0) : Vec3::Zero();
  e.initial = {0.0, {Pose::identity()}, {stack(omega, v)}};
  e.t_final = 10.0;
  e.step_sizes = kStepSizes;
  e.reference.resize(1);
  if (moving) {
    e.reference[0] = [](double t) { return Pose{rot(Vec3::UnitZ(), 2 * kPi * t), Vec3(10 * t, 0, 0)}; };
  } else {
    e.fixed_com = std::pair{0, Vec3::Zero()};
  }
  return finish(std::move(e), group);
}

Experiment model_free_body_offset(FreeBodyMotion motion, GroupKind group) {
  Experiment e;
  const bool moving = motion == FreeBodyMotion::RotationTranslation;
  e.id = moving ? "free-body-offset-translating" : "free-body-offset";
  e.description = moving ? "free box, frame offset from COM, spin about z while translating"
                         : "free box, frame offset from COM, skew spin with COM at rest";
  e.model.name = e.id;
  const Vec3 r0(0.4, 0, 0);
  e.model.bodies.push_back(aluminium_box("box", Vec3(0.8, 0.4, 0.1), r0));
  const Vec3 omega = moving ? Vec3(0, 0, 2 * kPi) : Vec3(10 * kPi, 2 * kPi, 0);
  const Vec3 v = r0.cross(omega) + (moving ? Vec3(10, 0, 0) : Vec3::Zero());
  e.initial = {0.0, {Pose::identity()}, {stack(omega, v)}};
  e.t_final = 10.0;
  e.step_sizes = kStepSizes;
  e.reference.resize(1);
  if (moving) {
    e.reference[0] = [r0](double t) {
      const Mat3 R = rot(Vec3::UnitZ(), 2 * kPi * t);
      return Pose{R, Vec3(0.4 + 10 * t, 0, 0) - R * r0};
    };
  } else {
    e.fixed_com = std::pair{0, r0};
  }
  return finish(std::move(e), group);
}

Experiment model_heavy_top(GroupKind group) {
  Experiment e;
  e.id = "heavy-top";
  e.description = "top on a spherical pivot with gravity and a spring at the COM";
  e.model.name = e.id;
  // frame at the COM; pivot at body point (-0.5, 0, 0)
  const Vec3 r0(-0.5, 0, 0);
  RigidBody top{"top", 21.6, Vec3(0.36, 0.306, 0.09).asDiagonal(), Vec3::Zero(), GroupKind::SE3};
  e.model.bodies.push_back(top);
  e.model.joints.push_back(make_joint("pivot", JointKind::Spherical, kGround, Vec3::Zero(), 0, r0));
  e.model.forces.push_back(Gravity{});
  // 10 N/mm
  e.model.forces.push_back(LinearSpring{"spring", kGround, Vec3(1, 0, 0.5), 0, Vec3::Zero(), 1e4});
  const Vec3 omega(0, 0, 0.5);
  e.initial = {0.0, {{Mat3::Identity(), -r0}}, {stack(omega, r0.cross(omega))}};
  e.t_final = 8.0;
  e.step_sizes = kStepSizes;
  return finish(std::move(e), group);
}

Experiment model_double_pendulum(GroupKind group) {
  Experiment e;
  e.id = "double-pendulum";
  e.description = "two aluminium boxes on spherical joints in gravity";
  e.model.name = e.id;
  const Vec3 edges(0.2, 0.1, 0.05);
  e.model.bodies.push_back(aluminium_box("link1", edges));
  e.model.bodies.push_back(aluminium_box("link2", edges));
  const Vec3 half(0.1, 0, 0);
  e.model.joints.push_back(make_joint("joint1", JointKind::Spherical, kGround, Vec3::Zero(), 0, -half));
  e.model.joints.push_back(make_joint("joint2", JointKind::Spherical, 0, half, 1, -half));
  e.model.forces.push_back(Gravity{});
  const Vec3 w1(10, 0, 0), w2(10 * kPi, 10 * kPi, 20 * kPi);
  // anchors at rest: v = anchor x omega
  e.initial = {0.0,
               {{Mat3::Identity(), Vec3(0.1, 0, 0)}, {Mat3::Identity(), Vec3(0.3, 0, 0)}},
               {stack(w1, (-half).cross(w1)), stack(w2, (-half).cross(w2))}};
  e.t_final = 8.0;
  e.step_sizes = kStepSizes;
  return finish(std::move(e), group);
}

Experiment model_four_bar(GroupKind group) {
  Experiment e;
  e.id = "four-bar";
  e.description = "planar crank-coupler-rocker loop, crank driven at 10 pi rad/s";
  e.model.name = e.id;
  const double l0 = 0.5;
  const double omega0 = 10 * kPi;
  const double l1 = 2 * l0 / (3 * std::sqrt(3.0));  // crank length
  const Vec3 a(0, 0, 0), b(0, -l1, 0), c(0, -3 * l1, 0), d(2 * l0, 0, 0);
  const double section = 0.02;
  const double l3 = (d - c).norm();

  // crank along y, frame at its centre
  e.model.bodies.push_back(aluminium_box("crank", Vec3(section, l1, section)));
  // coupler frame at B, bar along body x (world -y)
  e.model.bodies.push_back(
      aluminium_box("coupler", Vec3(2 * l1, section, section), Vec3(l1, 0, 0)));
  // rocker frame at the CD midpoint, x along CD
  e.model.bodies.push_back(aluminium_box("rocker", Vec3(l3, section, section)));

  const Vec3 x3 = (d - c) / l3;
  Mat3 r3;
  r3 << x3, Vec3::UnitZ().cross(x3), Vec3::UnitZ();
  const Pose p1{Mat3::Identity(), 0.5 * (a + b)};
  const Pose p2{rot(Vec3::UnitZ(), -kPi / 2), b};
  const Pose p3{r3, 0.5 * (c + d)};

  auto local = [](const Pose& p, const Vec3& x) { return Vec3(p.R.transpose() * (x - p.r)); };
  e.model.joints.push_back(make_joint("joint1", JointKind::Revolute, kGround, a, 0, local(p1, a)));
  e.model.joints.push_back(make_joint("joint2", JointKind::Revolute, 0, local(p1, b), 1, local(p2, b)));
  e.model.joints.push_back(make_joint("joint3", JointKind::Universal, 1, local(p2, c), 2,
                                      local(p3, c), Vec3::UnitZ(), Vec3::UnitY()));
  e.model.joints.push_back(make_joint("joint4", JointKind::Spherical, kGround, d, 2, local(p3, d)));

  e.initial = {0.0,
               {p1, p2, p3},
               {stack(Vec3(0, 0, omega0), Vec3(l0 * omega0 / (3 * std::sqrt(3.0)), 0, 0)),
                stack(Vec3(0, 0, -omega0 / 2), Vec3(0, 2 * l0 * omega0 / (3 * std::sqrt(3.0)), 0)),
                Vec6::Zero()}};
  e.t_final = 2.0;
  e.step_sizes = kStepSizes;
  return finish(std::move(e), group);
}

Experiment model_rp_chain(GroupKind group) {
  Experiment e;
  e.id = "rp-chain";
  e.description = "ring on a revolute joint carrying a slider on a sprung prismatic joint";
  e.model.name = e.id;
  const Vec3 w(0, 0, 20 * kPi);
  RigidBody ring{"ring", 6.82825, Vec3(0.0507567, 0.0507567, 0.0986682).asDiagonal(),
                 Vec3::Zero(), GroupKind::SE3};
  RigidBody slider{"slider", 0.864, Vec3(0.0002304, 0.0029952, 0.0029952).asDiagonal(),
                   Vec3::Zero(), GroupKind::SE3};
  e.model.bodies = {ring, slider};
  // revolute axis is world z through the origin; the ring COM sits at
  // (0.08, 0, 0), the slider slides vertically over the ring rim with its
  // COM at (0.23, 0, 0.1)
  const Vec3 axis_on_ring(-0.08, 0, 0);
  const Vec3 slide_on_ring(0.15, 0, 0.1);
  e.model.joints.push_back(
      make_joint("joint1", JointKind::Revolute, kGround, Vec3::Zero(), 0, axis_on_ring));
  Joint slide = make_joint("joint2", JointKind::Prismatic, 0, slide_on_ring, 1, Vec3::Zero());
  slide.ref_a = Vec3::UnitX();
  slide.ref_b = Vec3::UnitX();
  e.model.joints.push_back(slide);
  e.model.forces.push_back(Gravity{});
  e.model.forces.push_back(LinearSpring{"spring", 0, slide_on_ring, 1, Vec3::Zero(), 1e4});
  e.initial = {0.0,
               {{Mat3::Identity(), Vec3(0.08, 0, 0)}, {Mat3::Identity(), Vec3(0.23, 0, 0.1)}},
               {stack(w, axis_on_ring.cross(w)),
                stack(w, Vec3(-0.23, 0, -0.1).cross(w) + Vec3(0, 0, 1))}};
  e.t_final = 1.0;
  e.step_sizes = kStepSizes;
  // RK4 is unstable on the 107.6 rad/s spring mode at this step, so the
  // horizon stays short enough for the states to remain finite and moderate.
  e.extreme_step = 0.05;
  e.extreme_t_final = 0.2;
  return finish(std::move(e), group);
}

Experiment model_cardan(GroupKind group) {
  Experiment e;
  e.id = "cardan";
  e.description = "input shaft on a revolute joint driving a second shaft through a hook joint";
  e.model.name = e.id;
  const double length = 0.4, radius = 0.02;
  e.model.bodies.push_back(aluminium_rod_y("input", length, radius));
  e.model.bodies.push_back(aluminium_rod_y("drive", length, radius));
  // both shafts along world z
  const Mat3 r0 = rot(Vec3::UnitX(), kPi / 2);
  e.model.joints.push_back(make_joint("joint1", JointKind::Revolute, kGround, Vec3::Zero(), 0,
                                      Vec3::Zero(), Vec3::UnitZ(), Vec3::UnitY()));
  const Vec3 tip(0, length / 2, 0);
  e.model.joints.push_back(make_joint("joint2", JointKind::Universal, 0, tip, 1, -tip,
                                      Vec3::UnitX(), Vec3::UnitZ()));
  const Vec3 w1(0, kPi, 0), w2(kPi, kPi, 0);
  e.initial = {0.0,
               {{r0, Vec3::Zero()}, {r0, Vec3(0, 0, length)}},
               {stack(w1, Vec3::Zero()), stack(w2, w2.cross(tip))}};
  // the hook transmission locks up when the bend reaches 90 degrees, which
  // the free drive shaft does shortly after 0.4 s
  e.t_final = 0.4;
  e.step_sizes = kStepSizes;
  return finish(std::move(e), group);
}

std::vector<std::string> experiment_ids() {
  return {"free-body-com", "free-body-com-translating", "free-body-offset",
          "free-body-offset-translating", "heavy-top", "double-pendulum",
          "four-bar", "rp-chain", "cardan"};
}

Experiment make_experiment(const std::string& id, GroupKind group) {
  using enum FreeBodyMotion;
  if (id == "free-body-com") return model_free_body_com(SpatialRotation, group);
  if (id == "free-body-com-translating") return model_free_body_com(RotationTranslation, group);
  if (id == "free-body-offset") return model_free_body_offset(SpatialRotation, group);
  if (id == "free-body-offset-translating") return model_free_body_offset(RotationTranslation, group);
  if (id == "heavy-top") return model_heavy_top(group);
  if (id == "double-pendulum") return model_double_pendulum(group);
  if (id == "four-bar") return model_four_bar(group);
  if (id == "rp-chain") return model_rp_chain(group);
  if (id == "cardan") return model_cardan(group);
  throw std::invalid_argument("unknown model '" + id + "'");
}

Twist RotatingFrame::body_twist() const { return stack(omega * axis, omega * point.cross(axis)); }

Pose RotatingFrame::exact(double t) const {
  // rotate the frame origin about the axis line through `point`
  const Mat3 R = rot(axis, omega * t);
  return {R, point - R * point};
}

VelocityField RotatingFrame::field(GroupKind group) const {
  const Twist v = body_twist();
  if (group == GroupKind::SE3) {
    return [v](double, const std::vector<Pose>& poses) { return std::vector<Vec6>(poses.size(), v); };
  }
  return [v](double, const std::vector<Pose>& poses) {
    std::vector<Vec6> out;
    for (const Pose& p : poses) out.push_back(stack(rot_part(v), p.R * lin_part(v)));
    return out;
  };
}

double MetricSeries::max() const {
  double m = 0.0;
  for (double x : value) m = std::max(m, x);
  return m;
}

namespace {

template <class F>
MetricSeries series(const std::string& name, const TrajectoryRecord& record, F&& f) {
  MetricSeries s{name, {}, {}};
  for (const MbsState& st : record.samples) {
    s.t.push_back(st.t);
    s.value.push_back(f(st));
  }
  return s;
}

}  // namespace

JointViolation metric_constraint_violation(const TrajectoryRecord& record, const MbsModel& model,
                                           int joint) {
  const Joint& j = model.joints.at(joint);
  JointViolation out;
  out.position.name = j.name + "_position";
  out.orientation.name = j.name + "_orientation";
  for (const MbsState& st : record.samples) {
    const JointResidual r = joint_residual(model, j, st.poses);
    out.position.t.push_back(st.t);
    out.position.value.push_back(r.position);
    out.orientation.t.push_back(st.t);
    out.orientation.value.push_back(r.orientation);
  }
  return out;
}

MetricSeries metric_rotation_error(const TrajectoryRecord& record, int body,
                                   const PoseReference& reference) {
  return series("rotation_error", record, [&](const MbsState& st) {
    return rotation_distance(reference(st.t).R, st.poses[body].R);
  });
}

MetricSeries metric_translation_error(const TrajectoryRecord& record, int body,
                                      const PoseReference& reference) {
  return series("translation_error", record, [&](const MbsState& st) {
    return (st.poses[body].r - reference(st.t).r).norm();
  });
}

MetricSeries metric_com_drift(const TrajectoryRecord& record, const MbsModel& model, int body,
                              const Vec3& point) {
  const Vec3 com = model.bodies.at(body).com_offset;
  return series("com_drift", record, [&](const MbsState& st) {
    return (world_point(st, body, com) - point).norm();
  });
}

MetricSeries metric_energy(const TrajectoryRecord& record, const MbsModel& model) {
  return series("total_energy", record, [&](const MbsState& st) { return total_energy(model, st); });
}

MetricSeries metric_kinetic_energy(const TrajectoryRecord& record, const MbsModel& model) {
  return series("kinetic_energy", record,
                [&](const MbsState& st) { return kinetic_energy(model, st); });
}

ConvergenceOrder estimate_convergence_order(const std::vector<std::pair<double, double>>& samples) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [dt, err] : samples) {
    if (!(dt > 0.0)) throw std::invalid_argument("step sizes must be positive");
    if (err > kErrorFloor) logs.emplace_back(std::log(dt), std::log(err));
  }
  ConvergenceOrder out;
  out.points = static_cast<int>(logs.size());
  if (logs.size() < 2) {
    out.at_floor = true;
    return out;
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= logs.size();
  my /= logs.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : logs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  out.slope = sxy / sxx;
  return out;
}

}  // namespace geomdyn::bench
