#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "harmonica/guidance.hpp"
#include "harmonica/pipeline.hpp"

namespace harmonica {

// A deformation experiment: rest mesh, resolved handles with transforms,
// beta and operator kind. Parsed from a versioned JSON document:
//
//   {
//     "version": 1,
//     "mesh": "bar.obj" | {"fixture": "cylinder", "radius": 1, ...},
//     "beta": 0.2,
//     "operator": "curved" | "flat",
//     "handles": [
//       {"name": "tip",
//        "vertices": [12, 13],                              (optional)
//        "sphere": {"center": [x, y, z], "radius": r},      (optional)
//        "transform": {"quaternion": [w, x, y, z]          (or "axis": [..], "degrees": a)
//                      "translation": [..], "scale": 1, "pivot": [..]}}
//     ]
//   }
//
// Sphere selectors are resolved once against the rest positions and must
// capture at least one vertex. Relative mesh paths resolve against the
// scenario file's directory.
struct Scenario {
  std::string mesh_source;  // JSON of the "mesh" member, for echoing
  std::shared_ptr<const Model> model;
  HandleSet handles;
  double beta = 0.2;
  OperatorKind kind = OperatorKind::Curved;
};

// Throws Error(Scenario) on malformed documents and invalid handle sets;
// mesh loading errors keep their own codes.
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

// Scenario JSON with sphere selectors replaced by explicit vertex lists and
// rotations written as quaternions.
std::string dump_resolved(const Scenario& scenario);

OperatorKind parse_operator_kind(const std::string& name);

// Generates a fixture mesh from its JSON description, e.g.
// {"fixture": "cylinder", "radius": 1, "height": 4, "segments": 32, "rings": 30, "capped": true}.
Mesh make_fixture(const std::string& json_text);

}  // namespace harmonica
