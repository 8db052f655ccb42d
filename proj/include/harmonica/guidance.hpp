#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "harmonica/mesh.hpp"
#include "harmonica/operators.hpp"

namespace harmonica {

using Quaternion = Eigen::Quaterniond;

// Rigid-plus-scale handle transform: x' = s R(q) (x - pivot) + pivot + translation.
struct HandleTransform {
  Quaternion rotation = Quaternion::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  std::optional<Vec3> pivot;  // handle centroid when unset

  Mat3 linear() const { return scale * rotation.toRotationMatrix(); }
};

struct Handle {
  std::string name;
  std::vector<int> vertices;
  HandleTransform transform;
};

struct HandleSet {
  std::vector<Handle> handles;

  std::size_t size() const { return handles.size(); }
  // Vertex sets only, in handle order.
  std::vector<std::vector<int>> partition() const;
};

// Throws InvalidHandles on empty, overlapping or out-of-range vertex sets, or
// when no free vertex is left; throws InvalidArgument on non-unit quaternions
// or non-positive scales.
void validate_handles(const HandleSet& handles, std::size_t vertex_count);
void validate_partition(const std::vector<std::vector<int>>& partition, std::size_t vertex_count);

// Split of the vertices into free and constrained (handle) vertices.
class VertexPartition {
 public:
  VertexPartition(std::size_t vertex_count, std::vector<int> constrained);

  const std::vector<int>& constrained() const { return constrained_; }
  const std::vector<int>& free() const { return free_; }
  std::size_t vertex_count() const { return slot_.size(); }
  bool is_constrained(int v) const { return slot_[static_cast<std::size_t>(v)] < 0; }
  // Row of a free vertex in the reduced system.
  int free_index(int v) const { return slot_[static_cast<std::size_t>(v)]; }
  std::uint64_t hash() const { return hash_; }

  // Throws SingularSystem naming the first connected component that has no
  // constrained vertex.
  void require_anchored(const Mesh& mesh) const;

  bool operator==(const VertexPartition& other) const { return constrained_ == other.constrained_ && slot_.size() == other.slot_.size(); }

 private:
  std::vector<int> constrained_;
  std::vector<int> free_;
  std::vector<int> slot_;
  std::uint64_t hash_ = 0;
};

VertexPartition make_partition(std::size_t vertex_count, const std::vector<std::vector<int>>& handle_vertices);

struct HarmonicWeights {
  Eigen::MatrixXd vertex;    // |V| x m
  Eigen::MatrixXd triangle;  // |T| x m, mean of the three vertex rows
};

// One Dirichlet problem per handle (1 on the handle, 0 on the others), all
// sharing a single factorization of the reduced Laplacian.
HarmonicWeights solve_harmonic_weights(const Mesh& mesh, const SparseOperator& laplacian,
                                       const std::vector<std::vector<int>>& partition);

// Hemisphere-aligned normalized quaternion blend with the triangle-averaged
// weights; returns s_t R(q_t).
Mat3 blend_transforms(const HarmonicWeights& weights, const HandleSet& handles, std::size_t t);
Quaternion blend_rotation(const HarmonicWeights& weights, const HandleSet& handles, std::size_t t);

// Stacked per-triangle guidance blocks Z_t, 3|T| x 3.
struct GuidanceField {
  Eigen::Matrix<double, Eigen::Dynamic, 3> blocks;

  std::size_t triangle_count() const { return static_cast<std::size_t>(blocks.rows() / 3); }
  auto block(std::size_t t) const { return blocks.middleRows<3>(3 * static_cast<Eigen::Index>(t)); }
};

// Z_t = (G X0)_t M_t^T.
GuidanceField build_guidance(const Mesh& rest, const SparseOperator& gradient, const HarmonicWeights& weights,
                             const HandleSet& handles);

Vec3 handle_pivot(const Mesh& rest, const Handle& handle);

// Handle vertices in ascending order with their transformed rest positions.
struct Constraints {
  std::vector<int> vertices;
  Positions positions;
};

Constraints constrained_positions(const Mesh& rest, const HandleSet& handles);

}  // namespace harmonica
