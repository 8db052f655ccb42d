#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace harmonica {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Triangle = std::array<int, 3>;

// Vertex positions with one row per vertex and one column per world axis.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Indexed triangle surface. Immutable after construction; every triangle has
// area above the degeneracy threshold and a unit normal.
class Mesh {
 public:
  // Validates indices and triangle areas; throws Error otherwise.
  Mesh(Positions vertices, std::vector<Triangle> triangles);

  std::size_t vertex_count() const { return static_cast<std::size_t>(vertices_.rows()); }
  std::size_t triangle_count() const { return triangles_.size(); }

  const Positions& vertices() const { return vertices_; }
  Vec3 vertex(int i) const { return vertices_.row(i).transpose(); }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Triangle& triangle(std::size_t t) const { return triangles_[t]; }

  double area(std::size_t t) const { return areas_[t]; }
  const Vec3& normal(std::size_t t) const { return normals_[t]; }
  std::span<const double> areas() const { return areas_; }

  Vec3 bbox_min() const { return bbox_min_; }
  Vec3 bbox_max() const { return bbox_max_; }
  double bbox_diagonal() const { return (bbox_max_ - bbox_min_).norm(); }

  // Area threshold below which a triangle counts as degenerate.
  double degenerate_area_threshold() const;

  // Component label per vertex (via shared triangles); isolated vertices get
  // their own component.
  const std::vector<int>& vertex_components() const { return components_; }
  int component_count() const { return component_count_; }

 private:
  Positions vertices_;
  std::vector<Triangle> triangles_;
  std::vector<double> areas_;
  std::vector<Vec3> normals_;
  Vec3 bbox_min_ = Vec3::Zero();
  Vec3 bbox_max_ = Vec3::Zero();
  std::vector<int> components_;
  int component_count_ = 0;
};

struct InternalEdge {
  int id = 0;
  int left = 0;   // l(e)
  int right = 0;  // r(e)
  double length = 0.0;
  std::array<int, 2> vertices{};  // ascending
};

struct BoundaryEdge {
  int triangle = 0;
  std::array<int, 2> vertices{};  // ascending
};

struct EdgeTopology {
  std::vector<InternalEdge> internal_edges;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t edge_count() const { return internal_edges.size() + boundary_edges.size(); }
};

// Classifies edges as internal or boundary. For an internal edge {a < b} the
// left triangle is the one traversing a -> b in its cyclic order; if both or
// neither do, the lower triangle index is left. Throws on non-manifold edges.
EdgeTopology build_topology(const Mesh& mesh);

// Parses OBJ text. Polygons are fan-triangulated from their first vertex;
// normals, texture coordinates and materials are ignored.
Mesh parse_obj(std::string_view text);

}  // namespace harmonica
