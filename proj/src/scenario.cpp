#include "harmonica/scenario.hpp"

#include <cmath>

#include <json.hpp>

#include "harmonica/error.hpp"
#include "harmonica/fixtures.hpp"
#include "harmonica/io.hpp"

namespace harmonica {
namespace {

using nlohmann::json;

constexpr int kScenarioVersion = 1;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::Scenario, what); }

Vec3 read_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) malformed(what + " must be an array of three numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) malformed(what + " must be an array of three numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  if (!v.allFinite()) malformed(what + " must be finite");
  return v;
}

double read_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) malformed(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

int read_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) malformed(std::string("'") + key + "' must be an integer");
  return j.at(key).get<int>();
}

HandleTransform read_transform(const json& j) {
  HandleTransform tf;
  if (j.is_null()) return tf;
  if (!j.is_object()) malformed("'transform' must be an object");
  if (j.contains("quaternion")) {
    const auto& q = j.at("quaternion");
    if (!q.is_array() || q.size() != 4) malformed("'quaternion' must be [w, x, y, z]");
    for (const auto& c : q)
      if (!c.is_number()) malformed("'quaternion' must be [w, x, y, z]");
    tf.rotation = Quaternion(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  } else if (j.contains("axis") || j.contains("degrees")) {
    const Vec3 axis = read_vec3(j.value("axis", json::array({0, 0, 1})), "'axis'");
    if (axis.norm() == 0.0) malformed("'axis' must be non-zero");
    const double degrees = read_number(j, "degrees", 0.0);
    tf.rotation = Quaternion(Eigen::AngleAxisd(degrees * M_PI / 180.0, axis.normalized()));
  }
  if (j.contains("translation")) tf.translation = read_vec3(j.at("translation"), "'translation'");
  tf.scale = read_number(j, "scale", 1.0);
  if (j.contains("pivot")) tf.pivot = read_vec3(j.at("pivot"), "'pivot'");
  return tf;
}

Handle read_handle(const json& j, std::size_t index, const Mesh& mesh) {
  if (!j.is_object()) malformed("handle " + std::to_string(index) + " must be an object");
  Handle h;
  h.name = j.value("name", "handle" + std::to_string(index));
  std::vector<char> picked(mesh.vertex_count(), 0);
  if (j.contains("vertices")) {
    const auto& vs = j.at("vertices");
    if (!vs.is_array()) malformed("handle '" + h.name + "': 'vertices' must be an array");
    for (const auto& v : vs) {
      if (!v.is_number_integer()) malformed("handle '" + h.name + "': vertex ids must be integers");
      const long id = v.get<long>();
      if (id < 0 || static_cast<std::size_t>(id) >= mesh.vertex_count())
        malformed("handle '" + h.name + "': vertex " + std::to_string(id) + " out of range");
      picked[static_cast<std::size_t>(id)] = 1;
    }
  }
  if (j.contains("sphere")) {
    const auto& s = j.at("sphere");
    if (!s.is_object()) malformed("handle '" + h.name + "': 'sphere' must be an object");
    const Vec3 center = read_vec3(s.value("center", json()), "sphere center");
    const double radius = read_number(s, "radius", -1.0);
    if (!(radius >= 0.0)) malformed("handle '" + h.name + "': sphere radius must be non-negative");
    std::size_t captured = 0;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
      if ((mesh.vertex(static_cast<int>(v)) - center).norm() <= radius) {
        picked[v] = 1;
        ++captured;
      }
    }
    if (captured == 0) malformed("handle '" + h.name + "': sphere selector captures no vertex");
  }
  for (std::size_t v = 0; v < picked.size(); ++v)
    if (picked[v]) h.vertices.push_back(static_cast<int>(v));
  if (h.vertices.empty()) malformed("handle '" + h.name + "' selects no vertices");
  h.transform = read_transform(j.value("transform", json()));
  return h;
}

json fixture_to_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    malformed(std::string("fixture description: ") + e.what());
  }
}

Mesh fixture_from(const json& f) {
  const std::string kind = f.value("fixture", "");
  if (kind == "tetrahedron") return fixtures::tetrahedron(read_number(f, "side", 1.0));
  if (kind == "planar_grid") return fixtures::planar_grid(read_int(f, "cells", 20), read_number(f, "size", 1.0));
  if (kind == "cylinder")
    return fixtures::cylinder(read_number(f, "radius", 1.0), read_number(f, "height", 4.0), read_int(f, "segments", 32),
                              read_int(f, "rings", 30), f.value("capped", true));
  if (kind == "folded_strip")
    return fixtures::folded_strip(read_int(f, "folds", 6), read_number(f, "panel_length", 1.0),
                                  read_number(f, "fold_degrees", 45.0), read_int(f, "panel_segments", 4),
                                  read_number(f, "width", 1.0), read_int(f, "width_segments", 4));
  if (kind == "bar")
    return fixtures::bar(read_number(f, "sx", 1.0), read_number(f, "sy", 1.0), read_number(f, "sz", 4.0),
                         read_int(f, "cells_per_unit", 4));
  malformed("unknown fixture '" + kind + "'");
}

}  // namespace

OperatorKind parse_operator_kind(const std::string& name) {
  if (name == "flat") return OperatorKind::Flat;
  if (name == "curved") return OperatorKind::Curved;
  malformed("operator must be 'flat' or 'curved', got '" + name + "'");
}

Mesh make_fixture(const std::string& json_text) { return fixture_from(fixture_to_json(json_text)); }

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("scenario must be a JSON object");
  if (!doc.contains("version") || !doc.at("version").is_number_integer() || doc.at("version").get<int>() != kScenarioVersion)
    malformed("scenario needs \"version\": " + std::to_string(kScenarioVersion));
  if (!doc.contains("mesh")) malformed("scenario needs a 'mesh'");
  if (!doc.contains("handles") || !doc.at("handles").is_array() || doc.at("handles").empty())
    malformed("scenario needs a non-empty 'handles' array");

  Scenario sc;
  const auto& mesh_spec = doc.at("mesh");
  if (mesh_spec.is_string()) {
    std::filesystem::path p = mesh_spec.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    p = p.lexically_normal();
    sc.mesh_source = json(std::filesystem::absolute(p).string()).dump();
    sc.model = std::make_shared<Model>(load_obj(p));
  } else if (mesh_spec.is_object()) {
    sc.mesh_source = mesh_spec.dump();
    sc.model = std::make_shared<Model>(fixture_from(mesh_spec));
  } else {
    malformed("'mesh' must be a path or a fixture object");
  }

  sc.beta = read_number(doc, "beta", 0.2);
  if (!(sc.beta >= 0.0 && sc.beta < 1.0)) malformed("'beta' must lie in [0, 1)");
  if (doc.contains("operator")) {
    if (!doc.at("operator").is_string()) malformed("'operator' must be a string");
    sc.kind = parse_operator_kind(doc.at("operator").get<std::string>());
  }

  const auto& handles = doc.at("handles");
  for (std::size_t k = 0; k < handles.size(); ++k)
    sc.handles.handles.push_back(read_handle(handles[k], k, sc.model->mesh()));
  try {
    validate_handles(sc.handles, sc.model->mesh().vertex_count());
  } catch (const Error& e) {
    malformed(e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.parent_path());
}

std::string dump_resolved(const Scenario& scenario) {
  json doc;
  doc["version"] = kScenarioVersion;
  doc["mesh"] = json::parse(scenario.mesh_source);
  doc["beta"] = scenario.beta;
  doc["operator"] = to_string(scenario.kind);
  doc["handles"] = json::array();
  for (const auto& h : scenario.handles.handles) {
    json jh;
    jh["name"] = h.name;
    jh["vertices"] = h.vertices;
    const auto& q = h.transform.rotation;
    json tf;
    tf["quaternion"] = {q.w(), q.x(), q.y(), q.z()};
    tf["translation"] = {h.transform.translation.x(), h.transform.translation.y(), h.transform.translation.z()};
    tf["scale"] = h.transform.scale;
    if (h.transform.pivot) tf["pivot"] = {h.transform.pivot->x(), h.transform.pivot->y(), h.transform.pivot->z()};
    jh["transform"] = tf;
    doc["handles"].push_back(jh);
  }
  return doc.dump(2) + "\n";
}

}  // namespace harmonica
