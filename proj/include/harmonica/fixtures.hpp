#pragma once

#include "harmonica/mesh.hpp"

// Procedurally generated test surfaces.
namespace harmonica::fixtures {

// Regular tetrahedron with unit edges, outward-oriented.
Mesh tetrahedron(double side = 1.0);

// Square [0, size]^2 in the z = 0 plane split into cells x cells quads,
// each cut along the same diagonal.
Mesh planar_grid(int cells, double size = 1.0);

// Cylinder around the z axis from z = 0 to z = height with `rings` vertex
// rings of `segments` vertices each. Capped cylinders close both ends with a
// fan around a center vertex (vertex index |V|-2 at the bottom, |V|-1 at the top).
Mesh cylinder(double radius, double height, int segments, int rings, bool capped);

// Accordion: a strip along x, `folds` panels alternating up and down by
// `fold_degrees`, each panel `panel_length` long and split into
// `panel_segments` columns; `width` across y with `width_segments` rows.
Mesh folded_strip(int folds, double panel_length, double fold_degrees, int panel_segments, double width,
                  int width_segments);

// Closed box surface [0,sx]x[0,sy]x[0,sz] with a uniform lattice of `cells_per_unit` cells per unit length.
Mesh bar(double sx, double sy, double sz, int cells_per_unit);

}  // namespace harmonica::fixtures
