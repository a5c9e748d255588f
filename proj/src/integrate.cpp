#include "geomdyn/integrate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace geomdyn {

void ButcherTableau::check() const {
  const int s = stages();
  if (s == 0 || static_cast<int>(a.size()) != s || static_cast<int>(c.size()) != s) {
    throw std::invalid_argument(name + ": inconsistent tableau sizes");
  }
  double bsum = 0.0;
  for (int j = 0; j < s; ++j) {
    bsum += b[j];
    if (static_cast<int>(a[j].size()) != j) {
      throw std::invalid_argument(name + ": a must be strictly lower triangular");
    }
    double row = 0.0;
    for (double x : a[j]) row += x;
    if (std::abs(row - c[j]) > 1e-14) {
      throw std::invalid_argument(name + ": c_j != sum_l a_jl");
    }
  }
  if (std::abs(bsum - 1.0) > 1e-14) throw std::invalid_argument(name + ": weights do not sum to 1");
}

ButcherTableau tableau_rk4() {
  return {"rk4",
          {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}},
          {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
          {0.0, 0.5, 0.5, 1.0}};
}

ButcherTableau tableau_explicit_trapezoidal() {
  return {"explicit-trapezoidal", {{}, {0.5}}, {0.0, 1.0}, {0.0, 0.5}};
}

namespace {

// dt * sum_l w_l x_l, summing before scaling.
template <class T>
T weighted(double dt, const std::vector<double>& w, const std::vector<T>& x, int count) {
  T acc = T::Zero(x.empty() ? 0 : x[0].size());
  for (int l = 0; l < count; ++l) {
    if (w[l] != 0.0) acc += w[l] * x[l];
  }
  return dt * acc;
}

}  // namespace

StepRecord mk_step(const CSpaceGroup& group, const std::vector<Pose>& poses,
                   const VelocityField& field, double t, double dt, const ButcherTableau& tableau) {
  const int s = tableau.stages();
  const size_t n = poses.size();
  // k[i][j]: body i, stage j
  std::vector<std::vector<Vec6>> k(n);
  std::vector<std::vector<Vec6>> by_stage(s);
  std::vector<Pose> stage_poses = poses;
  std::vector<ScrewCoords> psi(n, ScrewCoords::Zero());
  for (int j = 0; j < s; ++j) {
    if (j > 0) {
      for (size_t i = 0; i < n; ++i) {
        psi[i] = weighted(dt, tableau.a[j], k[i], j);
        stage_poses[i] = group.compose(poses[i], group.exp(psi[i]));
      }
    }
    const std::vector<Vec6> v = field(t + tableau.c[j] * dt, stage_poses);
    for (size_t i = 0; i < n; ++i) {
      k[i].push_back(j == 0 ? v[i] : Vec6(group.dexpinv(-psi[i]) * v[i]));
      by_stage[j].push_back(k[i].back());
    }
  }
  StepRecord rec;
  rec.stages = std::move(by_stage);
  for (size_t i = 0; i < n; ++i) {
    rec.phi.push_back(weighted(dt, tableau.b, k[i], s));
    rec.poses.push_back(group.compose(poses[i], group.exp(rec.phi.back())));
  }
  return rec;
}

const char* parameterization_name(Parameterization p) {
  return p == Parameterization::Matrix ? "matrix" : "quaternion";
}

Parameterization parse_parameterization(const std::string& name) {
  if (name == "matrix") return Parameterization::Matrix;
  if (name == "quaternion") return Parameterization::Quaternion;
  throw std::invalid_argument("unknown parameterization '" + name + "' (matrix, quaternion)");
}

std::vector<std::unique_ptr<CSpaceGroup>> model_groups(const MbsModel& model, DexpinvMode mode) {
  std::vector<std::unique_ptr<CSpaceGroup>> out;
  for (const RigidBody& b : model.bodies) out.push_back(make_group(b.cspace, mode));
  return out;
}

namespace {

// Per-body increments of one coupled step: phi for the pose, dv for the
// velocity.
struct Increment {
  std::vector<ScrewCoords> phi;
  std::vector<Vec6> dv;
};

Increment coupled_increment(const MbsModel& model, const MbsState& state, double dt,
                            const ButcherTableau& tableau,
                            const std::vector<std::unique_ptr<CSpaceGroup>>& groups) {
  const int s = tableau.stages();
  const int n = model.body_count();
  std::vector<std::vector<Vec6>> k(n), f(n);
  MbsState stage = state;
  std::vector<ScrewCoords> psi(n, ScrewCoords::Zero());
  for (int j = 0; j < s; ++j) {
    stage.t = state.t + tableau.c[j] * dt;
    if (j > 0) {
      for (int i = 0; i < n; ++i) {
        psi[i] = weighted(dt, tableau.a[j], k[i], j);
        stage.poses[i] = groups[i]->compose(state.poses[i], groups[i]->exp(psi[i]));
        stage.velocities[i] = state.velocities[i] + weighted(dt, tableau.a[j], f[i], j);
      }
    }
    const std::vector<Vec6> acc = accelerations(model, stage);
    for (int i = 0; i < n; ++i) {
      f[i].push_back(acc[i]);
      k[i].push_back(j == 0 ? stage.velocities[i]
                            : Vec6(groups[i]->dexpinv(-psi[i]) * stage.velocities[i]));
    }
  }
  Increment inc;
  for (int i = 0; i < n; ++i) {
    inc.phi.push_back(weighted(dt, tableau.b, k[i], s));
    inc.dv.push_back(weighted(dt, tableau.b, f[i], s));
  }
  return inc;
}

// Kahan summation x += dx with running compensation c.
template <class T>
void compensated_add(T& x, T& c, const T& dx) {
  const T y = dx - c;
  const T sum = x + y;
  c = (sum - x) - y;
  x = sum;
}

}  // namespace

MbsState coupled_step(const MbsModel& model, const MbsState& state, double dt,
                      const ButcherTableau& tableau,
                      const std::vector<std::unique_ptr<CSpaceGroup>>& groups) {
  const Increment inc = coupled_increment(model, state, dt, tableau, groups);
  MbsState next;
  next.t = state.t + dt;
  for (int i = 0; i < model.body_count(); ++i) {
    next.poses.push_back(groups[i]->compose(state.poses[i], groups[i]->exp(inc.phi[i])));
    next.velocities.push_back(state.velocities[i] + inc.dv[i]);
  }
  return next;
}

MbsState coupled_step(const MbsModel& model, const MbsState& state, double dt,
                      const IntegratorOptions& options) {
  return coupled_step(model, state, dt, options.tableau, model_groups(model, options.dexpinv));
}

QuatState to_quat_state(const MbsModel& model, const MbsState& state) {
  QuatState out{state.t, {}, state.velocities};
  for (int i = 0; i < model.body_count(); ++i) {
    const Pose& p = state.poses[i];
    if (model.bodies[i].cspace == GroupKind::SE3) {
      out.coords.push_back(dq_from_pose(p).coeffs());
    } else {
      VecX c(7);
      c << quat_from_rotation(p.R).coeffs(), p.r;
      out.coords.push_back(c);
    }
  }
  return out;
}

MbsState from_quat_state(const MbsModel& model, const QuatState& state) {
  MbsState out{state.t, {}, state.velocities};
  for (int i = 0; i < model.body_count(); ++i) {
    const VecX& c = state.coords[i];
    if (model.bodies[i].cspace == GroupKind::SE3) {
      out.poses.push_back(pose_from_dq_scaled(DualQuaternion::from_coeffs(c)));
    } else {
      out.poses.push_back({rotation_from_quat_scaled(Quaternion::from_coeffs(c.head<4>())),
                           c.tail<3>()});
    }
  }
  return out;
}

std::vector<VecX> quat_rates(const MbsModel& model, const QuatState& state) {
  std::vector<VecX> out;
  for (int i = 0; i < model.body_count(); ++i) {
    const VecX& c = state.coords[i];
    if (model.bodies[i].cspace == GroupKind::SE3) {
      out.push_back(reconstruct_rates(DualQuaternion::from_coeffs(c), state.velocities[i],
                                      VelocityFrame::Body));
    } else {
      out.push_back(reconstruct_euler_rates(Quaternion::from_coeffs(c.head<4>()), c.tail<3>(),
                                            state.velocities[i]));
    }
  }
  return out;
}

namespace {

struct QuatIncrement {
  std::vector<VecX> dq;
  std::vector<Vec6> dv;
};

QuatIncrement quat_increment(const MbsModel& model, const QuatState& state, double dt,
                             const ButcherTableau& tableau) {
  const int s = tableau.stages();
  const int n = model.body_count();
  std::vector<std::vector<VecX>> kq(n);
  std::vector<std::vector<Vec6>> f(n);
  QuatState stage = state;
  for (int j = 0; j < s; ++j) {
    stage.t = state.t + tableau.c[j] * dt;
    if (j > 0) {
      for (int i = 0; i < n; ++i) {
        stage.coords[i] = state.coords[i] + weighted(dt, tableau.a[j], kq[i], j);
        stage.velocities[i] = state.velocities[i] + weighted(dt, tableau.a[j], f[i], j);
      }
    }
    const std::vector<Vec6> acc = accelerations(model, from_quat_state(model, stage));
    const std::vector<VecX> rates = quat_rates(model, stage);
    for (int i = 0; i < n; ++i) {
      f[i].push_back(acc[i]);
      kq[i].push_back(rates[i]);
    }
  }
  QuatIncrement inc;
  for (int i = 0; i < n; ++i) {
    inc.dq.push_back(weighted(dt, tableau.b, kq[i], s));
    inc.dv.push_back(weighted(dt, tableau.b, f[i], s));
  }
  return inc;
}

}  // namespace

QuatState quat_step(const MbsModel& model, const QuatState& state, double dt,
                    const ButcherTableau& tableau) {
  const QuatIncrement inc = quat_increment(model, state, dt, tableau);
  QuatState next{state.t + dt, {}, {}};
  for (int i = 0; i < model.body_count(); ++i) {
    next.coords.push_back(state.coords[i] + inc.dq[i]);
    next.velocities.push_back(state.velocities[i] + inc.dv[i]);
  }
  return next;
}

QuatInvariants quat_invariants(const MbsModel& model, const QuatState& state) {
  QuatInvariants out;
  for (int i = 0; i < model.body_count(); ++i) {
    const VecX& c = state.coords[i];
    out.unit = std::max(out.unit, std::abs(c.head<4>().norm() - 1.0));
    if (model.bodies[i].cspace == GroupKind::SE3) {
      out.plucker = std::max(out.plucker, std::abs(c.head<4>().dot(c.tail<4>())));
    }
  }
  return out;
}

long long step_count(double t0, double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step size must be positive");
  const double span = t_final - t0;
  if (span < 0.0) throw std::invalid_argument("final time precedes the initial time");
  const long long n = std::llround(span / dt);
  if (std::abs(static_cast<double>(n) * dt - span) > 1e-9 * std::max(1.0, span)) {
    std::ostringstream msg;
    msg << "time span " << span << " s is not a multiple of dt = " << dt << " s";
    throw std::invalid_argument(msg.str());
  }
  return n;
}

namespace {

bool finite_state(const MbsState& s) {
  for (size_t i = 0; i < s.poses.size(); ++i) {
    if (!s.poses[i].R.allFinite() || !s.poses[i].r.allFinite() || !s.velocities[i].allFinite()) {
      return false;
    }
  }
  return true;
}

}  // namespace

TrajectoryRecord integrate(const MbsModel& model, const MbsState& state0, double dt,
                           double t_final, const IntegratorOptions& options, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  options.tableau.check();
  const long long n = step_count(state0.t, t_final, dt);
  const bool quat = options.parameterization == Parameterization::Quaternion;
  const auto groups = model_groups(model, options.dexpinv);

  TrajectoryRecord rec;
  rec.steps = n;
  MbsState state = state0;
  QuatState qstate;
  rec.samples.push_back(state);
  if (quat) {
    qstate = to_quat_state(model, state);
    rec.invariants.push_back(quat_invariants(model, qstate));
  }
  // Compensated summation of the additive parts of each update keeps
  // round-off from accumulating linearly over long runs.
  const int bodies = model.body_count();
  std::vector<Mat3> comp_R(bodies, Mat3::Zero());
  std::vector<Vec3> comp_r(bodies, Vec3::Zero());
  std::vector<Vec6> comp_v(bodies, Vec6::Zero());
  std::vector<VecX> comp_q;
  if (quat) {
    for (const VecX& c : qstate.coords) comp_q.push_back(VecX::Zero(c.size()));
  }
  for (long long i = 1; i <= n; ++i) {
    try {
      if (quat) {
        const QuatIncrement inc = quat_increment(model, qstate, dt, options.tableau);
        for (int b = 0; b < bodies; ++b) {
          compensated_add(qstate.coords[b], comp_q[b], inc.dq[b]);
          compensated_add(qstate.velocities[b], comp_v[b], inc.dv[b]);
        }
        qstate.t = state0.t + static_cast<double>(i) * dt;
        rec.invariants.push_back(quat_invariants(model, qstate));
        state = from_quat_state(model, qstate);
      } else {
        const Increment inc = coupled_increment(model, state, dt, options.tableau, groups);
        for (int b = 0; b < bodies; ++b) {
          const Pose step = groups[b]->exp(inc.phi[b]);
          // translation part of compose(pose, step), added separately
          const Pose rotated = groups[b]->compose({state.poses[b].R, Vec3::Zero()}, step);
          // R <- R + R (exp - I): a constant rotation increment would
          // otherwise repeat the same rounding every step
          const Mat3 dR = state.poses[b].R * so3_exp_minus_identity(rot_part(inc.phi[b]));
          compensated_add(state.poses[b].R, comp_R[b], dR);
          compensated_add(state.poses[b].r, comp_r[b], rotated.r);
          compensated_add(state.velocities[b], comp_v[b], inc.dv[b]);
        }
        state.t = state0.t + static_cast<double>(i) * dt;
      }
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(std::string("step ") + std::to_string(i) + ": " + e.what(), i);
    }
    if (!finite_state(state)) {
      throw StepError("step " + std::to_string(i) + ": non-finite state", i);
    }
    if (i % stride == 0 || i == n) rec.samples.push_back(state);
  }
  return rec;
}

}  // namespace geomdyn
