#pragma once

#include "geomdyn/dualquat.hpp"
#include "geomdyn/dynamics.hpp"
#include "geomdyn/liealg.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace geomdyn {

// Explicit Runge-Kutta coefficients; a is strictly lower triangular.
struct ButcherTableau {
  std::string name;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> c;

  int stages() const { return static_cast<int>(b.size()); }
  // Throws std::invalid_argument unless sum(b) = 1, c_j = sum_l a_jl and a is
  // strictly lower triangular.
  void check() const;
};

ButcherTableau tableau_rk4();
// Two-stage scheme k2 = f(t + dt/2, x + dt/2 k1), x+ = x + dt k2.
ButcherTableau tableau_explicit_trapezoidal();

// Velocities of all bodies as a function of time and poses.
using VelocityField = std::function<std::vector<Vec6>(double, const std::vector<Pose>&)>;

struct StepRecord {
  std::vector<ScrewCoords> phi;            // per body increment
  std::vector<std::vector<Vec6>> stages;   // k_j per stage, per body
  std::vector<Pose> poses;                 // g_prev * exp(phi)
};

// One Munthe-Kaas step of the kinematic reconstruction on a single group.
// Throws DomainError if a stage argument reaches a dexpinv pole.
StepRecord mk_step(const CSpaceGroup& group, const std::vector<Pose>& poses,
                   const VelocityField& field, double t, double dt, const ButcherTableau& tableau);

enum class Parameterization { Matrix, Quaternion };
const char* parameterization_name(Parameterization p);
Parameterization parse_parameterization(const std::string& name);

struct IntegratorOptions {
  ButcherTableau tableau = tableau_rk4();
  Parameterization parameterization = Parameterization::Matrix;
  DexpinvMode dexpinv = DexpinvMode::ClosedForm;
};

// Per-body groups for a model, built once per run.
std::vector<std::unique_ptr<CSpaceGroup>> model_groups(const MbsModel& model, DexpinvMode mode);

// Coupled MK step of poses and velocities with shared stages. Accelerations
// come from the index-1 solve at each stage.
MbsState coupled_step(const MbsModel& model, const MbsState& state, double dt,
                      const ButcherTableau& tableau,
                      const std::vector<std::unique_ptr<CSpaceGroup>>& groups);
MbsState coupled_step(const MbsModel& model, const MbsState& state, double dt,
                      const IntegratorOptions& options = {});

// State with rotations carried as quaternions: 8 dual-quaternion coefficients
// for SE(3) bodies, 4 Euler parameters followed by r for SO(3)xR3 bodies.
struct QuatState {
  double t = 0.0;
  std::vector<VecX> coords;
  std::vector<Vec6> velocities;
};

QuatState to_quat_state(const MbsModel& model, const MbsState& state);
// Poses from the scale-invariant maps, so slightly non-unit coordinates are fine.
MbsState from_quat_state(const MbsModel& model, const QuatState& state);
// Coordinate rates for the state's velocities.
std::vector<VecX> quat_rates(const MbsModel& model, const QuatState& state);

// Vector-space RK step of (coordinates, velocities).
QuatState quat_step(const MbsModel& model, const QuatState& state, double dt,
                    const ButcherTableau& tableau);

// Largest | |Q| - 1 | and |Q . Q_eps| over the bodies (second is 0 for
// Euler parameters).
struct QuatInvariants {
  double unit = 0.0;
  double plucker = 0.0;
};
QuatInvariants quat_invariants(const MbsModel& model, const QuatState& state);

struct TrajectoryRecord {
  std::vector<MbsState> samples;
  // Quaternion parameterization only: invariants at every step, not just
  // sampled ones.
  std::vector<QuatInvariants> invariants;
  long long steps = 0;
};

// Fixed-step integration from state0.t to t_final, sampling every stride
// steps and always at the final step. Step failures are rethrown as
// StepError carrying the step index.
TrajectoryRecord integrate(const MbsModel& model, const MbsState& state0, double dt,
                           double t_final, const IntegratorOptions& options = {}, int stride = 1);

// Number of fixed steps of size dt covering [t0, t_final]; throws
// std::invalid_argument if the span is not an integer multiple of dt.
long long step_count(double t0, double t_final, double dt);

}  // namespace geomdyn
