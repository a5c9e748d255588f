#pragma once

#include "geomdyn/dynamics.hpp"
#include "geomdyn/integrate.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace geomdyn::bench {

inline constexpr double kAluminiumDensity = 2700.0;  // kg/m^3

// Analytic pose of one body as a function of time.
using PoseReference = std::function<Pose(double)>;

struct Experiment {
  std::string id;
  std::string description;
  MbsModel model;
  MbsState initial;
  double t_final = 0.0;  // s
  std::vector<double> step_sizes;
  // Per body; empty function where no closed form exists.
  std::vector<PoseReference> reference;
  // Body whose COM must stay at a fixed world point, if any.
  std::optional<std::pair<int, Vec3>> fixed_com;
  // Large step used only to show kinematic exactness, with its own horizon.
  std::optional<double> extreme_step;
  double extreme_t_final = 0.0;
};

enum class FreeBodyMotion { SpatialRotation, RotationTranslation };

// All builders return the experiment on the requested group and throw
// InfeasibleStateError if the assembled initial state violates h = 0 or J V = 0.
Experiment model_free_body_com(FreeBodyMotion motion, GroupKind group = GroupKind::SE3);
Experiment model_free_body_offset(FreeBodyMotion motion, GroupKind group = GroupKind::SE3);
Experiment model_heavy_top(GroupKind group = GroupKind::SE3);
Experiment model_double_pendulum(GroupKind group = GroupKind::SE3);
Experiment model_four_bar(GroupKind group = GroupKind::SE3);
Experiment model_rp_chain(GroupKind group = GroupKind::SE3);
Experiment model_cardan(GroupKind group = GroupKind::SE3);

std::vector<std::string> experiment_ids();
// Throws std::invalid_argument for unknown ids.
Experiment make_experiment(const std::string& id, GroupKind group = GroupKind::SE3);
// Same experiment on another group, velocities converted.
Experiment retarget(const Experiment& e, GroupKind group);

// Body rotating at constant rate about a fixed axis that does not pass
// through its reference frame origin.
struct RotatingFrame {
  double omega = 2.0 * 3.14159265358979323846;  // rad/s
  Vec3 axis = Vec3::UnitZ();                    // body frame, unit
  Vec3 point = Vec3(1.0, 0.0, 0.0);             // axis point in the body frame, m

  Twist body_twist() const;
  // Closed-form screw motion from the identity pose.
  Pose exact(double t) const;
  // Velocity field in the representation of the group.
  VelocityField field(GroupKind group) const;
};

struct MetricSeries {
  std::string name;
  std::vector<double> t;
  std::vector<double> value;

  double max() const;
  double last() const { return value.empty() ? 0.0 : value.back(); }
};

struct JointViolation {
  MetricSeries position;     // m
  MetricSeries orientation;  // dimensionless
};

JointViolation metric_constraint_violation(const TrajectoryRecord& record, const MbsModel& model,
                                           int joint);
// |log(R_ref^T R)| per sample.
MetricSeries metric_rotation_error(const TrajectoryRecord& record, int body,
                                   const PoseReference& reference);
// |r - r_ref| per sample.
MetricSeries metric_translation_error(const TrajectoryRecord& record, int body,
                                      const PoseReference& reference);
// Distance of the body's COM from a fixed world point.
MetricSeries metric_com_drift(const TrajectoryRecord& record, const MbsModel& model, int body,
                              const Vec3& point);
MetricSeries metric_energy(const TrajectoryRecord& record, const MbsModel& model);
MetricSeries metric_kinetic_energy(const TrajectoryRecord& record, const MbsModel& model);

inline constexpr double kErrorFloor = 1e-13;

struct ConvergenceOrder {
  bool at_floor = false;  // fewer than two errors above the floor
  double slope = 0.0;
  int points = 0;         // pairs used in the fit
};
// Least-squares slope of log(error) against log(dt), ignoring errors at or
// below kErrorFloor.
ConvergenceOrder estimate_convergence_order(const std::vector<std::pair<double, double>>& samples);

}  // namespace geomdyn::bench
