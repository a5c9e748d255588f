#include "geomdyn/acceptance.hpp"

#include "geomdyn/bench.hpp"
#include "geomdyn/integrate.hpp"
#include "geomdyn/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace geomdyn::acceptance {

namespace {

using Clock = std::chrono::steady_clock;
using bench::Experiment;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string dt_label(double dt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", dt);
  return buf;
}

struct Run {
  GroupKind group;
  double dt;
  Experiment experiment;
  TrajectoryRecord record;
  double seconds = 0.0;
};

struct RunRequest {
  GroupKind group;
  double dt;
  double t_final = -1.0;  // negative: the experiment's horizon
  Parameterization parameterization = Parameterization::Matrix;
};

std::vector<Run> run_experiment(const std::string& id, const std::vector<RunRequest>& requests,
                                const Options& options) {
  std::vector<Run> runs(requests.size());
  parallel_for(static_cast<int>(requests.size()), options.workers, [&](int i) {
    const RunRequest& q = requests[i];
    Run& r = runs[i];
    r.group = q.group;
    r.dt = q.dt;
    r.experiment = bench::make_experiment(id, q.group);
    IntegratorOptions opt;
    opt.dexpinv = options.dexpinv;
    opt.parameterization = q.parameterization;
    const auto start = Clock::now();
    r.record = integrate(r.experiment.model, r.experiment.initial, q.dt,
                         q.t_final < 0 ? r.experiment.t_final : q.t_final, opt);
    r.seconds = since(start);
  });
  return runs;
}

std::vector<RunRequest> grid(const std::vector<GroupKind>& groups, const std::vector<double>& dts) {
  std::vector<RunRequest> out;
  for (GroupKind g : groups) {
    for (double dt : dts) out.push_back({g, dt});
  }
  return out;
}

const std::vector<double> kSteps{1e-2, 1e-3, 1e-4};
const std::vector<GroupKind> kBoth{GroupKind::SE3, GroupKind::SO3xR3};

const Run& find(const std::vector<Run>& runs, GroupKind g, double dt) {
  for (const Run& r : runs) {
    if (r.group == g && r.dt == dt) return r;
  }
  throw std::logic_error("run not found");
}

double max_position(const Run& r, int joint) {
  return bench::metric_constraint_violation(r.record, r.experiment.model, joint).position.max();
}

double max_orientation(const Run& r, int joint) {
  return bench::metric_constraint_violation(r.record, r.experiment.model, joint).orientation.max();
}

const char* tag(GroupKind g) { return g == GroupKind::SE3 ? "se3" : "so3xr3"; }

// Ratio of the larger to the smaller of two residuals.
double spread(double a, double b) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (hi == 0.0) return 1.0;
  return lo == 0.0 ? INFINITY : hi / lo;
}

// --- criteria ---

CriterionResult kernel_identities(const Options& options) {
  CriterionResult res{1, "kernel identity suite", false, {}, 0.0};
  const auto start = Clock::now();
  const SE3Group group(options.dexpinv);
  std::mt19937 gen(20240611);
  std::normal_distribution<> normal;
  std::uniform_real_distribution<> unit;
  double exp_err = 0.0, inv_err = 0.0, park_selig = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vec3 dir(normal(gen), normal(gen), normal(gen));
    dir.normalize();
    // half log-uniform over (1e-6, 0.1), half uniform over (0.1, pi)
    const double angle = i % 2 == 0 ? std::exp(std::log(1e-6) + unit(gen) * std::log(1e5))
                                    : 0.1 + unit(gen) * (std::numbers::pi - 0.1);
    const ScrewCoords x = stack(angle * dir, Vec3(normal(gen), normal(gen), normal(gen)));
    const Mat4 oracle = Mat4(hat_se3(x)).exp();
    exp_err = std::max(exp_err, (se3_exp(x).homogeneous() - oracle).cwiseAbs().maxCoeff());
    const Mat6 inv = group.dexpinv(x);
    inv_err = std::max(inv_err, (inv * se3_dexp(x) - Mat6::Identity()).cwiseAbs().maxCoeff());
    park_selig = std::max(park_selig, (inv - se3_dexpinv_selig(x)).cwiseAbs().maxCoeff());
  }
  res.seconds = since(start);
  res.pass = exp_err <= 1e-12 && inv_err <= 1e-12 && park_selig <= 1e-10 && res.seconds < 10.0;
  res.detail = "exp vs oracle " + sci(exp_err) + ", dexpinv*dexp-I " + sci(inv_err) +
               ", park vs selig " + sci(park_selig);
  return res;
}

CriterionResult constant_twist(const Options& options) {
  CriterionResult res{2, "constant-twist exactness", false, {}, 0.0};
  const auto start = Clock::now();
  const bench::RotatingFrame frame;
  const double dt = 0.1;
  const ButcherTableau trap = tableau_explicit_trapezoidal();
  const SE3Group se3(options.dexpinv);
  std::vector<Pose> poses{Pose::identity()};
  double se3_err = 0.0;
  for (int i = 1; i <= 10; ++i) {
    poses = mk_step(se3, poses, frame.field(GroupKind::SE3), (i - 1) * dt, dt, trap).poses;
    const Pose exact = frame.exact(i * dt);
    se3_err = std::max({se3_err, (poses[0].R - exact.R).cwiseAbs().maxCoeff(),
                        (poses[0].r - exact.r).cwiseAbs().maxCoeff()});
  }
  const DirectProductGroup dp(options.dexpinv);
  const Pose one = mk_step(dp, {Pose::identity()}, frame.field(GroupKind::SO3xR3), 0.0, dt, trap).poses[0];
  const double dp_err = (one.r - frame.exact(dt).r).norm();
  res.seconds = since(start);
  res.pass = se3_err <= 1e-13 && dp_err > 1e-4;
  res.detail = "se3 max pose error over 10 steps " + sci(se3_err) + ", so3xr3 position error after one step " +
               sci(dp_err) + " m";
  return res;
}

CriterionResult free_body_com(const Options& options) {
  CriterionResult res{3, "free body at COM keeps the COM fixed", false, {}, 0.0};
  const auto start = Clock::now();
  const auto runs = run_experiment("free-body-com", grid(kBoth, {1e-2}), options);
  bool ok = true;
  for (const Run& r : runs) {
    const auto& [body, point] = *r.experiment.fixed_com;
    const double drift = bench::metric_com_drift(r.record, r.experiment.model, body, point).max();
    ok = ok && drift <= 1e-12;
    res.detail += std::string(tag(r.group)) + " drift " + sci(drift) + " m; ";
  }
  res.seconds = since(start);
  res.pass = ok;
  return res;
}

CriterionResult free_body_translation(const Options& options) {
  CriterionResult res{4, "free body rotation+translation accuracy", false, {}, 0.0};
  const auto start = Clock::now();
  const auto runs = run_experiment("free-body-com-translating", grid(kBoth, kSteps), options);
  bool ok = true;
  std::vector<std::pair<double, double>> se3_errors;
  std::ostringstream detail;
  for (const Run& r : runs) {
    const auto& ref = r.experiment.reference[0];
    const double trans = bench::metric_translation_error(r.record, 0, ref).max();
    const double rot = bench::metric_rotation_error(r.record, 0, ref).max();
    ok = ok && rot <= 1e-10;
    if (r.group == GroupKind::SO3xR3) ok = ok && trans <= 1e-10;
    if (r.group == GroupKind::SE3) se3_errors.emplace_back(r.dt, trans);
    detail << tag(r.group) << " dt=" << dt_label(r.dt) << " trans " << sci(trans) << " rot " << sci(rot) << "; ";
  }
  const bench::ConvergenceOrder order = bench::estimate_convergence_order(se3_errors);
  ok = ok && !order.at_floor && std::abs(order.slope - 4.0) <= 0.5;
  detail << "se3 order " << (order.at_floor ? std::string("floor") : std::to_string(order.slope))
         << " from " << order.points << " points";
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult free_body_offset(const Options& options) {
  CriterionResult res{5, "off-COM free body COM drift", false, {}, 0.0};
  const auto start = Clock::now();
  const auto runs = run_experiment("free-body-offset", grid(kBoth, kSteps), options);
  bool ok = true;
  std::map<std::pair<GroupKind, double>, double> drift;
  std::ostringstream detail;
  for (const Run& r : runs) {
    const auto& [body, point] = *r.experiment.fixed_com;
    const double d = bench::metric_com_drift(r.record, r.experiment.model, body, point).max();
    drift[{r.group, r.dt}] = d;
    if (r.group == GroupKind::SE3) ok = ok && d <= 1e-10;
    detail << tag(r.group) << " dt=" << dt_label(r.dt) << " " << sci(d) << "; ";
  }
  const double se3 = drift[{GroupKind::SE3, 1e-2}], dp = drift[{GroupKind::SO3xR3, 1e-2}];
  ok = ok && dp >= 1e3 * se3 && dp > 0.0;
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str() + "ratio at 1e-2 " + sci(se3 > 0 ? dp / se3 : INFINITY);
  return res;
}

CriterionResult heavy_top(const Options& options) {
  CriterionResult res{6, "heavy top constraint and energy", false, {}, 0.0};
  const auto start = Clock::now();
  const auto runs = run_experiment("heavy-top", grid(kBoth, kSteps), options);
  bool ok = true;
  std::ostringstream detail;
  for (double dt : kSteps) {
    const double h = max_position(find(runs, GroupKind::SE3, dt), 0);
    ok = ok && h <= 1e-9;
    detail << "se3 dt=" << dt_label(dt) << " |h| " << sci(h) << "; ";
  }
  const Run& se3 = find(runs, GroupKind::SE3, 1e-2);
  const Run& dp = find(runs, GroupKind::SO3xR3, 1e-2);
  const double h_se3 = max_position(se3, 0), h_dp = max_position(dp, 0);
  ok = ok && h_dp >= 1e3 * h_se3 && h_dp > 0.0;
  detail << "so3xr3 dt=0.01 |h| " << sci(h_dp) << "; ";

  auto drift = [](const Run& r) {
    const bench::MetricSeries e = bench::metric_energy(r.record, r.experiment.model);
    double d = 0.0;
    for (double x : e.value) d = std::max(d, std::abs(x - e.value.front()));
    return d;
  };
  const double e0 = total_energy(se3.experiment.model, se3.experiment.initial);
  const bool energy_ok = std::abs(e0 - 5000.69) <= 5000.69 * 1e-3;
  const double d_se3 = drift(se3), d_dp = drift(dp);
  ok = ok && energy_ok && d_se3 < d_dp;
  const double slow = find(runs, GroupKind::SE3, 1e-4).seconds;
  ok = ok && slow < 60.0;
  detail << "E(0) " << e0 << " J (expected 5000.69); energy drift at 0.01 se3 " << sci(d_se3)
         << " so3xr3 " << sci(d_dp) << "; dt=1e-4 run " << slow << " s";
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult double_pendulum(const Options& options) {
  CriterionResult res{7, "double pendulum joint residuals", false, {}, 0.0};
  const auto start = Clock::now();
  const auto runs = run_experiment("double-pendulum", grid(kBoth, kSteps), options);
  bool ok = true;
  std::ostringstream detail;
  for (double dt : kSteps) {
    const Run& a = find(runs, GroupKind::SE3, dt);
    const Run& b = find(runs, GroupKind::SO3xR3, dt);
    const double j1 = max_position(a, 0);
    const double j2a = max_position(a, 1), j2b = max_position(b, 1);
    ok = ok && j1 <= 1e-9 && spread(j2a, j2b) <= 10.0;
    detail << "dt=" << dt_label(dt) << " joint1 se3 " << sci(j1) << ", joint2 se3 " << sci(j2a)
           << " so3xr3 " << sci(j2b) << "; ";
  }
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult rp_chain(const Options& options) {
  CriterionResult res{8, "RP chain subgroup exactness", false, {}, 0.0};
  const auto start = Clock::now();
  const Experiment proto = bench::model_rp_chain();
  std::vector<RunRequest> requests = grid(kBoth, kSteps);
  requests.push_back({GroupKind::SE3, *proto.extreme_step, proto.extreme_t_final});
  const auto runs = run_experiment("rp-chain", requests, options);
  bool ok = true;
  std::ostringstream detail;
  for (const Run& r : runs) {
    if (r.group != GroupKind::SE3) continue;
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) worst = std::max({worst, max_position(r, j), max_orientation(r, j)});
    ok = ok && worst <= 1e-9;
    detail << "se3 dt=" << dt_label(r.dt) << " " << sci(worst) << "; ";
  }
  for (int j = 0; j < 2; ++j) {
    std::vector<std::pair<double, double>> errs;
    for (double dt : kSteps) errs.emplace_back(dt, max_position(find(runs, GroupKind::SO3xR3, dt), j));
    const bench::ConvergenceOrder order = bench::estimate_convergence_order(errs);
    ok = ok && !order.at_floor && std::abs(order.slope - 4.0) <= 0.5;
    detail << "so3xr3 joint" << j + 1 << " residuals";
    for (const auto& [dt, e] : errs) detail << " " << sci(e);
    detail << " order " << (order.at_floor ? std::string("floor") : std::to_string(order.slope)) << "; ";
  }
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult four_bar(const Options& options) {
  CriterionResult res{9, "4-bar revolute orientation and grounded positions", false, {}, 0.0};
  const auto start = Clock::now();
  const auto runs = run_experiment("four-bar", grid(kBoth, kSteps), options);
  bool ok = true;
  std::ostringstream detail;
  for (const Run& r : runs) {
    double orient = 0.0;
    for (int j = 0; j < static_cast<int>(r.experiment.model.joints.size()); ++j) {
      if (r.experiment.model.joints[j].kind == JointKind::Revolute) {
        orient = std::max(orient, max_orientation(r, j));
      }
    }
    const double grounded = std::max(max_position(r, 0), max_position(r, 3));
    ok = ok && orient <= 1e-9;
    if (r.group == GroupKind::SE3) ok = ok && grounded <= 1e-9;
    detail << tag(r.group) << " dt=" << dt_label(r.dt) << " revolute orientation " << sci(orient)
           << " grounded position " << sci(grounded) << "; ";
  }
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult cardan(const Options& options) {
  CriterionResult res{10, "Cardan joint residuals", false, {}, 0.0};
  const auto start = Clock::now();
  const auto runs = run_experiment("cardan", grid(kBoth, kSteps), options);
  bool ok = true;
  std::ostringstream detail;
  for (double dt : kSteps) {
    const Run& a = find(runs, GroupKind::SE3, dt);
    const Run& b = find(runs, GroupKind::SO3xR3, dt);
    const double pos_a = max_position(a, 1), pos_b = max_position(b, 1);
    const double ori_a = max_orientation(a, 1), ori_b = max_orientation(b, 1);
    const double j1 = std::max({max_position(a, 0), max_orientation(a, 0), max_position(b, 0),
                                max_orientation(b, 0)});
    ok = ok && pos_a <= 1e-9 && spread(ori_a, ori_b) <= 10.0 && j1 <= 1e-9;
    if (dt == 1e-2) ok = ok && pos_b > 1e-9;
    detail << "dt=" << dt_label(dt) << " joint2 position se3 " << sci(pos_a) << " so3xr3 " << sci(pos_b)
           << ", orientation se3 " << sci(ori_a) << " so3xr3 " << sci(ori_b) << ", joint1 " << sci(j1)
           << "; ";
  }
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult quaternion_path(const Options& options) {
  CriterionResult res{11, "quaternion path equivalence", false, {}, 0.0};
  const auto start = Clock::now();
  std::vector<RunRequest> requests;
  for (GroupKind g : kBoth) {
    requests.push_back({g, 1e-3});
    requests.push_back({g, 1e-3, -1.0, Parameterization::Quaternion});
  }
  const auto runs = run_experiment("heavy-top", requests, options);
  bool ok = true;
  std::ostringstream detail;
  for (size_t i = 0; i < runs.size(); i += 2) {
    const Pose& a = runs[i].record.samples.back().poses[0];
    const Pose& b = runs[i + 1].record.samples.back().poses[0];
    const double diff = std::max((a.R - b.R).cwiseAbs().maxCoeff(), (a.r - b.r).cwiseAbs().maxCoeff());
    double unit = 0.0, plucker = 0.0;
    for (const auto& inv : runs[i + 1].record.invariants) {
      unit = std::max(unit, inv.unit);
      plucker = std::max(plucker, inv.plucker);
    }
    ok = ok && diff <= 1e-8 && unit <= 1e-8 && plucker <= 1e-8;
    detail << tag(runs[i].group) << " pose difference at t=8 " << sci(diff) << ", |Q|-1 " << sci(unit)
           << ", Q.Qe " << sci(plucker) << "; ";
  }
  res.seconds = since(start);
  res.pass = ok;
  res.detail = detail.str();
  return res;
}

}  // namespace

CriterionResult run_criterion(int id, const Options& options) {
  try {
    switch (id) {
      case 1: return kernel_identities(options);
      case 2: return constant_twist(options);
      case 3: return free_body_com(options);
      case 4: return free_body_translation(options);
      case 5: return free_body_offset(options);
      case 6: return heavy_top(options);
      case 7: return double_pendulum(options);
      case 8: return rp_chain(options);
      case 9: return four_bar(options);
      case 10: return cardan(options);
      case 11: return quaternion_path(options);
      default: throw std::invalid_argument("no criterion " + std::to_string(id));
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    return {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0.0};
  }
}

std::vector<CriterionResult> run_all(const Options& options,
                                     const std::function<void(const CriterionResult&)>& report) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    out.push_back(run_criterion(id, options));
    if (report) report(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s %2d  %s  (%.1f s)  ", r.pass ? "PASS" : "FAIL", r.id,
                r.title.c_str(), r.seconds);
  return head + r.detail;
}

}  // namespace geomdyn::acceptance
