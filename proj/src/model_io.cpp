#include "geomdyn/model_io.hpp"

#include "geomdyn/liealg.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

namespace geomdyn::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Cursor into the document that remembers its JSON pointer for messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError((path_.empty() ? std::string("/") : path_) + ": " + what, path_);
  }

  bool has(const char* key) const { return value_.contains(key); }
  Node at(const char* key) const {
    if (!value_.is_object()) fail("expected an object");
    if (!value_.contains(key)) fail(std::string("missing field '") + key + "'");
    return {value_.at(key), path_ + "/" + key};
  }
  Node item(size_t i) const { return {value_.at(i), path_ + "/" + std::to_string(i)}; }

  // Rejects keys outside `allowed`, which catches unit typos like "mass".
  void only(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail("unknown field '" + key + "'");
    }
  }

  size_t size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }
  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double x = value_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }
  std::string text() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }
  Vec3 vec3() const {
    if (size() != 3) fail("expected 3 numbers");
    return {item(0).number(), item(1).number(), item(2).number()};
  }
  Mat3 mat3() const {
    if (size() != 3) fail("expected 3 rows");
    Mat3 m;
    for (int i = 0; i < 3; ++i) m.row(i) = item(i).vec3().transpose();
    return m;
  }

 private:
  const json& value_;
  std::string path_;
};

int line_of(const std::string& text, size_t byte, int& column) {
  int line = 1;
  size_t line_start = 0;
  for (size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  column = static_cast<int>(byte - line_start);
  return line;
}

int body_ref(const Node& node, const std::map<std::string, int>& names) {
  const std::string name = node.text();
  if (name == "ground") return kGround;
  const auto it = names.find(name);
  if (it == names.end()) node.fail("unknown body '" + name + "'");
  return it->second;
}

RigidBody read_body(const Node& node) {
  node.only({"name", "mass_kg", "inertia_kgm2", "com_offset_m", "group"});
  RigidBody b;
  b.name = node.at("name").text();
  b.mass = node.at("mass_kg").number();
  if (!(b.mass > 0.0)) node.at("mass_kg").fail("body '" + b.name + "': mass must be positive");
  const Node inertia = node.at("inertia_kgm2");
  b.inertia_ref = inertia.mat3();
  const Mat3& th = b.inertia_ref;
  if ((th - th.transpose()).cwiseAbs().maxCoeff() > 1e-12 * th.norm() ||
      Eigen::LLT<Mat3>(th).info() != Eigen::Success) {
    inertia.fail("body '" + b.name + "': inertia is not symmetric positive definite");
  }
  if (node.has("com_offset_m")) b.com_offset = node.at("com_offset_m").vec3();
  if (node.has("group")) {
    try {
      b.cspace = parse_group(node.at("group").text());
    } catch (const Error& e) {
      node.at("group").fail(e.what());
    }
  }
  return b;
}

Joint read_joint(const Node& node, const std::map<std::string, int>& names) {
  node.only({"name", "kind", "body_a", "body_b", "anchor_a_m", "anchor_b_m", "axis_a", "axis_b",
             "ref_a", "ref_b"});
  Joint j;
  j.name = node.at("name").text();
  try {
    j.kind = parse_joint_kind(node.at("kind").text());
  } catch (const ModelError& e) {
    node.at("kind").fail(e.what());
  }
  j.body_a = body_ref(node.at("body_a"), names);
  j.body_b = body_ref(node.at("body_b"), names);
  if (node.has("anchor_a_m")) j.anchor_a = node.at("anchor_a_m").vec3();
  if (node.has("anchor_b_m")) j.anchor_b = node.at("anchor_b_m").vec3();
  if (node.has("axis_a")) j.axis_a = node.at("axis_a").vec3();
  if (node.has("axis_b")) j.axis_b = node.at("axis_b").vec3();
  if (node.has("ref_a")) j.ref_a = node.at("ref_a").vec3();
  if (node.has("ref_b")) j.ref_b = node.at("ref_b").vec3();
  return j;
}

ForceElement read_force(const Node& node, const std::map<std::string, int>& names) {
  const std::string type = node.at("type").text();
  if (type == "gravity") {
    node.only({"type", "g_m_per_s2"});
    Gravity g;
    if (node.has("g_m_per_s2")) g.g = node.at("g_m_per_s2").vec3();
    return g;
  }
  if (type == "spring") {
    node.only({"type", "name", "body_a", "point_a_m", "body_b", "point_b_m", "stiffness_N_per_m"});
    LinearSpring s;
    s.name = node.at("name").text();
    s.body_a = body_ref(node.at("body_a"), names);
    s.point_a = node.at("point_a_m").vec3();
    s.body_b = body_ref(node.at("body_b"), names);
    s.point_b = node.at("point_b_m").vec3();
    s.stiffness = node.at("stiffness_N_per_m").number();
    return s;
  }
  node.at("type").fail("unknown force type '" + type + "' (gravity, spring)");
}

MbsState read_initial(const Node& node, const MbsModel& model,
                      const std::map<std::string, int>& names) {
  node.only({"t_s", "bodies"});
  MbsState s;
  s.t = node.has("t_s") ? node.at("t_s").number() : 0.0;
  const int n = model.body_count();
  s.poses.resize(n);
  s.velocities.resize(n);
  std::vector<bool> seen(n, false);
  const Node list = node.at("bodies");
  for (size_t k = 0; k < list.size(); ++k) {
    const Node entry = list.item(k);
    entry.only({"body", "rotation", "position_m", "omega_rad_per_s", "v_m_per_s"});
    const int i = body_ref(entry.at("body"), names);
    if (i == kGround) entry.at("body").fail("the ground has no state");
    if (seen[i]) entry.at("body").fail("body '" + model.bodies[i].name + "' listed twice");
    seen[i] = true;
    const Node rot = entry.at("rotation");
    const Mat3 R = rot.mat3();
    if ((R.transpose() * R - Mat3::Identity()).norm() > 1e-9 || R.determinant() < 0.0) {
      rot.fail("body '" + model.bodies[i].name + "': rotation is not orthonormal");
    }
    s.poses[i] = {R, entry.at("position_m").vec3()};
    s.velocities[i] = stack(entry.at("omega_rad_per_s").vec3(), entry.at("v_m_per_s").vec3());
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[i]) list.fail("no initial state for body '" + model.bodies[i].name + "'");
  }
  return s;
}

ordered_json to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
ordered_json to_json(const Mat3& m) {
  return {to_json(Vec3(m.row(0))), to_json(Vec3(m.row(1))), to_json(Vec3(m.row(2)))};
}

}  // namespace

ModelFile parse_model(const std::string& text, bool project) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int column = 0;
    const int line = line_of(text, e.byte, column);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + e.what(),
                     line, column);
  }
  const Node root(doc, "");
  root.only({"name", "bodies", "joints", "forces", "initial", "t_final_s"});

  ModelFile file;
  MbsModel& model = file.model;
  model.name = root.has("name") ? root.at("name").text() : "unnamed";
  std::map<std::string, int> names;
  const Node bodies = root.at("bodies");
  for (size_t i = 0; i < bodies.size(); ++i) {
    model.bodies.push_back(read_body(bodies.item(i)));
    const std::string& name = model.bodies.back().name;
    if (name == "ground" || !names.emplace(name, static_cast<int>(i)).second) {
      bodies.item(i).at("name").fail("body name '" + name + "' is reserved or duplicated");
    }
  }
  if (root.has("joints")) {
    const Node joints = root.at("joints");
    for (size_t i = 0; i < joints.size(); ++i) model.joints.push_back(read_joint(joints.item(i), names));
  }
  if (root.has("forces")) {
    const Node forces = root.at("forces");
    for (size_t i = 0; i < forces.size(); ++i) model.forces.push_back(read_force(forces.item(i), names));
  }
  try {
    validate(model);
  } catch (const ModelError& e) {
    throw SchemaError(e.what(), "");
  }
  file.initial = read_initial(root.at("initial"), model, names);
  if (root.has("t_final_s")) file.t_final = root.at("t_final_s").number();

  if (project) file.initial = project_velocities(model, file.initial);
  check_consistent(model, file.initial);
  return file;
}

ModelFile load_model_file(const std::filesystem::path& path, bool project) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot read model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), project);
}

std::string serialize_model(const ModelFile& file) {
  const MbsModel& model = file.model;
  auto ref = [&](int i) { return i == kGround ? std::string("ground") : model.bodies[i].name; };
  ordered_json doc;
  doc["name"] = model.name;
  doc["bodies"] = ordered_json::array();
  for (const RigidBody& b : model.bodies) {
    doc["bodies"].push_back({{"name", b.name},
                             {"mass_kg", b.mass},
                             {"inertia_kgm2", to_json(b.inertia_ref)},
                             {"com_offset_m", to_json(b.com_offset)},
                             {"group", group_name(b.cspace)}});
  }
  doc["joints"] = ordered_json::array();
  for (const Joint& j : model.joints) {
    doc["joints"].push_back({{"name", j.name},
                             {"kind", joint_kind_name(j.kind)},
                             {"body_a", ref(j.body_a)},
                             {"body_b", ref(j.body_b)},
                             {"anchor_a_m", to_json(j.anchor_a)},
                             {"anchor_b_m", to_json(j.anchor_b)},
                             {"axis_a", to_json(j.axis_a)},
                             {"axis_b", to_json(j.axis_b)},
                             {"ref_a", to_json(j.ref_a)},
                             {"ref_b", to_json(j.ref_b)}});
  }
  doc["forces"] = ordered_json::array();
  for (const ForceElement& f : model.forces) {
    if (const auto* g = std::get_if<Gravity>(&f)) {
      doc["forces"].push_back({{"type", "gravity"}, {"g_m_per_s2", to_json(g->g)}});
    } else {
      const auto& s = std::get<LinearSpring>(f);
      doc["forces"].push_back({{"type", "spring"},
                               {"name", s.name},
                               {"body_a", ref(s.body_a)},
                               {"point_a_m", to_json(s.point_a)},
                               {"body_b", ref(s.body_b)},
                               {"point_b_m", to_json(s.point_b)},
                               {"stiffness_N_per_m", s.stiffness}});
    }
  }
  ordered_json init;
  init["t_s"] = file.initial.t;
  init["bodies"] = ordered_json::array();
  for (int i = 0; i < model.body_count(); ++i) {
    init["bodies"].push_back({{"body", model.bodies[i].name},
                              {"rotation", to_json(file.initial.poses[i].R)},
                              {"position_m", to_json(file.initial.poses[i].r)},
                              {"omega_rad_per_s", to_json(rot_part(file.initial.velocities[i]))},
                              {"v_m_per_s", to_json(lin_part(file.initial.velocities[i]))}});
  }
  doc["initial"] = init;
  if (file.t_final) doc["t_final_s"] = *file.t_final;
  return doc.dump(2) + "\n";
}

}  // namespace geomdyn::io
