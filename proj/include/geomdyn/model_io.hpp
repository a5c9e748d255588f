#pragma once

#include "geomdyn/dynamics.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace geomdyn::io {

// Malformed text. line and column are 1-based.
struct ParseError : ModelError {
  ParseError(const std::string& what, int line_no, int column_no)
      : ModelError(what), line(line_no), column(column_no) {}
  int line;
  int column;
};

// Well-formed text that does not describe a valid model. `field` is a JSON
// pointer to the offending value, e.g. "/bodies/1/inertia_kgm2".
struct SchemaError : ModelError {
  SchemaError(const std::string& what, std::string field_path)
      : ModelError(what), field(std::move(field_path)) {}
  std::string field;
};

struct ModelFile {
  MbsModel model;
  MbsState initial;
  std::optional<double> t_final;  // s
};

// Model files are JSON with units in the key names (mass_kg, anchor_a_m,
// stiffness_N_per_m, ...). See README for the layout.
//
// The initial state must satisfy h = 0 and J V = 0; otherwise
// InfeasibleStateError is thrown with the residual. With
// `project_velocities` the velocities are projected onto J V = 0 first.
ModelFile parse_model(const std::string& text, bool project_velocities = false);
ModelFile load_model_file(const std::filesystem::path& path, bool project_velocities = false);

std::string serialize_model(const ModelFile& file);

}  // namespace geomdyn::io
