#include "geomdyn/output.hpp"

#include <cstdio>

namespace geomdyn::output {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_field(fields[i]);
  }
  out << '\n';
}

namespace {

bool has_reference(const bench::Experiment& e, int body) {
  return body < static_cast<int>(e.reference.size()) && e.reference[body];
}

}  // namespace

std::vector<std::string> trajectory_header(const bench::Experiment& e) {
  std::vector<std::string> cols{"t_s"};
  for (const Joint& j : e.model.joints) {
    cols.push_back(j.name + "_position_residual_m");
    cols.push_back(j.name + "_orientation_residual");
  }
  for (int b = 0; b < e.model.body_count(); ++b) {
    if (!has_reference(e, b)) continue;
    cols.push_back(e.model.bodies[b].name + "_rotation_error_rad");
    cols.push_back(e.model.bodies[b].name + "_translation_error_m");
  }
  if (e.fixed_com) cols.push_back(e.model.bodies[e.fixed_com->first].name + "_com_drift_m");
  cols.push_back("kinetic_energy_J");
  cols.push_back("total_energy_J");
  return cols;
}

void write_trajectory(std::ostream& out, const bench::Experiment& e,
                      const TrajectoryRecord& record) {
  std::vector<bench::MetricSeries> columns;
  for (int j = 0; j < static_cast<int>(e.model.joints.size()); ++j) {
    bench::JointViolation v = bench::metric_constraint_violation(record, e.model, j);
    columns.push_back(std::move(v.position));
    columns.push_back(std::move(v.orientation));
  }
  for (int b = 0; b < e.model.body_count(); ++b) {
    if (!has_reference(e, b)) continue;
    columns.push_back(bench::metric_rotation_error(record, b, e.reference[b]));
    columns.push_back(bench::metric_translation_error(record, b, e.reference[b]));
  }
  if (e.fixed_com) {
    columns.push_back(
        bench::metric_com_drift(record, e.model, e.fixed_com->first, e.fixed_com->second));
  }
  columns.push_back(bench::metric_kinetic_energy(record, e.model));
  columns.push_back(bench::metric_energy(record, e.model));

  write_row(out, trajectory_header(e));
  std::vector<std::string> row;
  for (size_t k = 0; k < record.samples.size(); ++k) {
    row.clear();
    row.push_back(format_number(record.samples[k].t));
    for (const bench::MetricSeries& c : columns) row.push_back(format_number(c.value[k]));
    write_row(out, row);
  }
}

}  // namespace geomdyn::output
