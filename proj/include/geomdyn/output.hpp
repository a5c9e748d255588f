#pragma once

#include "geomdyn/bench.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace geomdyn::output {

// "%.17g"
std::string format_number(double x);
// RFC 4180 field: quoted when it holds a comma, quote or line break.
std::string csv_field(const std::string& s);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Trajectory columns, a pure function of the experiment's model and metrics:
//   t_s
//   <joint>_position_residual_m, <joint>_orientation_residual   per joint
//   <body>_rotation_error_rad, <body>_translation_error_m        per body with a reference
//   <body>_com_drift_m                                          if the COM must stay fixed
//   kinetic_energy_J, total_energy_J
std::vector<std::string> trajectory_header(const bench::Experiment& experiment);
void write_trajectory(std::ostream& out, const bench::Experiment& experiment,
                      const TrajectoryRecord& record);

}  // namespace geomdyn::output
