// geomdyn command line: simulate, sweep, verify, list-models.
//
// Exit codes: 0 success, 1 invalid configuration, 2 simulation failure,
// 3 verify found a failing criterion.

#include "geomdyn/acceptance.hpp"
#include "geomdyn/bench.hpp"
#include "geomdyn/model_io.hpp"
#include "geomdyn/output.hpp"
#include "geomdyn/parallel.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace geomdyn;
namespace fs = std::filesystem;

constexpr int kExitConfig = 1;
constexpr int kExitSimulation = 2;
constexpr int kExitVerifyFailed = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::string> models;
  std::string model_file;
  std::vector<std::string> groups;
  std::string param = "matrix";
  std::vector<double> dts;
  double t_final = 0.0;  // 0: the experiment's own horizon
  int stride = 1;
  std::string out;
  bool project = false;
  bool dexpinv_approx = false;
};

IntegratorOptions integrator_options(const RunConfig& c) {
  IntegratorOptions o;
  o.parameterization = parse_parameterization(c.param);
  o.dexpinv = c.dexpinv_approx ? DexpinvMode::SecondOrderSeries : DexpinvMode::ClosedForm;
  return o;
}

std::vector<GroupKind> groups_of(const RunConfig& c, std::vector<std::string> fallback) {
  std::vector<GroupKind> out;
  for (const std::string& g : c.groups.empty() ? fallback : c.groups) out.push_back(parse_group(g));
  return out;
}

bench::Experiment load(const RunConfig& c, const std::string& id, GroupKind group) {
  bench::Experiment e;
  if (!c.model_file.empty()) {
    io::ModelFile f = io::load_model_file(c.model_file, c.project);
    e.id = f.model.name;
    e.model = std::move(f.model);
    e.initial = std::move(f.initial);
    e.t_final = f.t_final.value_or(0.0);
    e.reference.resize(e.model.bodies.size());
    e = bench::retarget(e, group);
  } else {
    e = bench::make_experiment(id, group);
    if (c.project) e.initial = project_velocities(e.model, e.initial);
  }
  if (c.t_final > 0.0) e.t_final = c.t_final;
  if (!(e.t_final > 0.0)) throw ConfigError("no final time: pass --tf or set t_final_s");
  return e;
}

std::vector<double> step_sizes(const RunConfig& c, const bench::Experiment& e) {
  if (!c.dts.empty()) return c.dts;
  if (e.step_sizes.empty()) throw ConfigError("no step size: pass --dt");
  return e.step_sizes;
}

void check_steps(const bench::Experiment& e, const std::vector<double>& dts) {
  for (double dt : dts) step_count(e.initial.t, e.t_final, dt);
}

std::string dt_label(double dt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", dt);
  return buf;
}

fs::path output_path(const std::string& out, GroupKind group, double dt) {
  const fs::path base(out);
  return base.parent_path() / (base.stem().string() + "_" + group_name(group) + "_dt" +
                               dt_label(dt) + base.extension().string());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw ConfigError("cannot write '" + path.string() + "'");
}

int cmd_simulate(const RunConfig& c) {
  if (c.model_file.empty() == c.models.empty()) {
    throw ConfigError("simulate needs exactly one of --model or --model-file");
  }
  if (c.models.size() > 1) throw ConfigError("simulate takes one --model; use sweep for several");
  const std::string id = c.models.empty() ? "" : c.models.front();
  const IntegratorOptions options = integrator_options(c);
  const std::vector<GroupKind> groups = groups_of(c, {"se3"});

  struct Job {
    bench::Experiment experiment;
    double dt;
  };
  std::vector<Job> jobs;
  for (GroupKind g : groups) {
    bench::Experiment e = load(c, id, g);
    const std::vector<double> dts = step_sizes(c, e);
    check_steps(e, dts);
    for (double dt : dts) jobs.push_back({e, dt});
  }
  if (jobs.size() > 1 && c.out.empty()) {
    throw ConfigError("several (group, dt) runs need --out; files get _<group>_dt<dt> suffixes");
  }

  for (const Job& job : jobs) {
    const TrajectoryRecord rec =
        integrate(job.experiment.model, job.experiment.initial, job.dt, job.experiment.t_final,
                  options, c.stride);
    std::ostringstream csv;
    output::write_trajectory(csv, job.experiment, rec);
    if (c.out.empty()) {
      std::cout << csv.str();
    } else if (jobs.size() == 1) {
      write_file(c.out, csv.str());
    } else {
      write_file(output_path(c.out, job.experiment.model.bodies[0].cspace, job.dt), csv.str());
    }
  }
  return 0;
}

struct SweepRow {
  std::string model;
  GroupKind group = GroupKind::SE3;
  double dt = 0.0;
  double t_final = 0.0;
  long long steps = 0;
  std::optional<double> position_residual, orientation_residual;
  std::optional<double> rotation_error, translation_error, com_drift;
  double energy_drift = 0.0;
};

SweepRow summarize(const bench::Experiment& e, double dt, const TrajectoryRecord& rec) {
  SweepRow row{e.id, e.model.bodies[0].cspace, dt, e.t_final, rec.steps};
  for (int j = 0; j < static_cast<int>(e.model.joints.size()); ++j) {
    const bench::JointViolation v = bench::metric_constraint_violation(rec, e.model, j);
    row.position_residual = std::max(row.position_residual.value_or(0.0), v.position.max());
    row.orientation_residual = std::max(row.orientation_residual.value_or(0.0), v.orientation.max());
  }
  for (int b = 0; b < e.model.body_count(); ++b) {
    if (!e.reference[b]) continue;
    row.rotation_error = std::max(row.rotation_error.value_or(0.0),
                                  bench::metric_rotation_error(rec, b, e.reference[b]).max());
    row.translation_error = std::max(row.translation_error.value_or(0.0),
                                     bench::metric_translation_error(rec, b, e.reference[b]).max());
  }
  if (e.fixed_com) {
    row.com_drift =
        bench::metric_com_drift(rec, e.model, e.fixed_com->first, e.fixed_com->second).max();
  }
  const bench::MetricSeries energy = bench::metric_energy(rec, e.model);
  for (double x : energy.value) row.energy_drift = std::max(row.energy_drift, std::abs(x - energy.value[0]));
  return row;
}

std::string optional_number(const std::optional<double>& x) {
  return x ? output::format_number(*x) : "";
}

// Slope of the metric over the rows of one (model, group); "floor" when the
// errors sit at round-off, empty when there is nothing to fit.
std::string order_label(const std::vector<const SweepRow*>& rows,
                        std::optional<double> SweepRow::*metric) {
  std::vector<std::pair<double, double>> samples;
  for (const SweepRow* r : rows) {
    if (r->*metric) samples.emplace_back(r->dt, *(r->*metric));
  }
  if (samples.size() < 2) return "";
  const bench::ConvergenceOrder order = bench::estimate_convergence_order(samples);
  return order.at_floor ? "floor" : output::format_number(order.slope);
}

int cmd_sweep(const RunConfig& c) {
  const IntegratorOptions options = integrator_options(c);
  std::vector<std::string> ids = c.models;
  if (ids.empty() && c.model_file.empty()) ids = bench::experiment_ids();
  if (!c.model_file.empty()) {
    if (!ids.empty()) throw ConfigError("sweep takes --model or --model-file, not both");
    ids = {""};
  }
  const std::vector<GroupKind> groups = groups_of(c, {"se3", "so3xr3"});

  struct Job {
    const bench::Experiment* experiment;
    double dt;
  };
  std::vector<bench::Experiment> experiments;
  experiments.reserve(ids.size() * groups.size());
  std::vector<Job> jobs;
  for (const std::string& id : ids) {
    for (GroupKind g : groups) {
      experiments.push_back(load(c, id, g));
      check_steps(experiments.back(), step_sizes(c, experiments.back()));
    }
  }
  for (const bench::Experiment& e : experiments) {
    for (double dt : step_sizes(c, e)) jobs.push_back({&e, dt});
  }

  std::vector<SweepRow> rows(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), worker_count(), [&](int i) {
    const bench::Experiment& e = *jobs[i].experiment;
    try {
      const TrajectoryRecord rec = integrate(e.model, e.initial, jobs[i].dt, e.t_final, options, 1);
      rows[i] = summarize(e, jobs[i].dt, rec);
    } catch (const StepError& err) {
      throw StepError(e.id + " (" + group_name(e.model.bodies[0].cspace) + ", dt " +
                          dt_label(jobs[i].dt) + "): " + err.what(),
                      err.step);
    }
  });

  std::map<std::pair<std::string, GroupKind>, std::vector<const SweepRow*>> by_case;
  for (const SweepRow& r : rows) by_case[{r.model, r.group}].push_back(&r);

  std::ostringstream csv;
  output::write_row(csv, {"model", "group", "param", "dt_s", "t_final_s", "steps",
                          "max_position_residual_m", "max_orientation_residual",
                          "max_rotation_error_rad", "max_translation_error_m", "max_com_drift_m",
                          "energy_drift_J", "position_residual_order",
                          "translation_error_order"});
  for (const SweepRow& r : rows) {
    const auto& peers = by_case[{r.model, r.group}];
    output::write_row(csv, {r.model, group_name(r.group), c.param, output::format_number(r.dt),
                            output::format_number(r.t_final), std::to_string(r.steps),
                            optional_number(r.position_residual),
                            optional_number(r.orientation_residual),
                            optional_number(r.rotation_error), optional_number(r.translation_error),
                            optional_number(r.com_drift), output::format_number(r.energy_drift),
                            order_label(peers, &SweepRow::position_residual),
                            order_label(peers, &SweepRow::translation_error)});
  }
  if (c.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(c.out, csv.str());
  }
  return 0;
}

int cmd_verify(bool approx, const std::vector<int>& only) {
  acceptance::Options options;
  options.dexpinv = approx ? DexpinvMode::SecondOrderSeries : DexpinvMode::ClosedForm;
  options.workers = worker_count();
  bool all = true;
  auto report = [&](const acceptance::CriterionResult& r) {
    all = all && r.pass;
    std::cout << acceptance::format_result(r) << std::endl;
  };
  if (only.empty()) {
    acceptance::run_all(options, report);
  } else {
    for (int id : only) {
      if (id < 1 || id > acceptance::kCriterionCount) {
        throw ConfigError("criterion " + std::to_string(id) + " does not exist");
      }
      report(acceptance::run_criterion(id, options));
    }
  }
  return all ? 0 : kExitVerifyFailed;
}

int cmd_list_models() {
  for (const std::string& id : bench::experiment_ids()) {
    std::cout << id << '\t' << bench::make_experiment(id).description << '\n';
  }
  return 0;
}

void add_run_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--model", c.models, "built-in model id (see list-models)");
  cmd->add_option("--model-file", c.model_file, "JSON model definition")->check(CLI::ExistingFile);
  cmd->add_option("--group", c.groups, "c-space group: se3 or so3xr3 (repeatable)");
  cmd->add_option("--param", c.param, "configuration parameterization: matrix or quaternion")
      ->check(CLI::IsMember({"matrix", "quaternion"}));
  cmd->add_option("--dt", c.dts, "step size in s (repeatable)")->check(CLI::PositiveNumber);
  cmd->add_option("--tf", c.t_final, "final time in s")->check(CLI::PositiveNumber);
  cmd->add_flag("--project-velocities", c.project, "project initial velocities onto J V = 0");
  cmd->add_flag("--dexpinv-approx", c.dexpinv_approx,
                "use the second-order dexpinv series instead of the closed form");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie group integration of rigid multibody systems"};
  app.require_subcommand(1, 1);

  RunConfig sim, sweep;
  CLI::App* simulate = app.add_subcommand("simulate", "integrate one model and write a trajectory CSV");
  add_run_options(simulate, sim);
  simulate->add_option("--stride", sim.stride, "write every n-th step")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out, "CSV path (stdout if omitted)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run models x groups x step sizes, write a summary CSV");
  add_run_options(sweep_cmd, sweep);
  sweep_cmd->add_option("--out", sweep.out, "summary CSV path (stdout if omitted)");

  bool verify_approx = false;
  std::vector<int> criteria;
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_flag("--dexpinv-approx", verify_approx,
                   "use the second-order dexpinv series (mutation check)");
  verify->add_option("--criterion", criteria, "run only these criteria (repeatable)");

  CLI::App* list = app.add_subcommand("list-models", "list the built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*verify) return cmd_verify(verify_approx, criteria);
    if (*list) return cmd_list_models();
  } catch (const StepError& e) {
    // the message carries "step <index>"
    std::cerr << "simulation failed: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const io::ParseError& e) {
    std::cerr << "model file parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const io::SchemaError& e) {
    std::cerr << "model file schema error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleStateError& e) {
    std::cerr << "infeasible initial state: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    // parse_group and friends report bad names through geomdyn::Error
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
