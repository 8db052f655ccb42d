#include "harmonica/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kCancellationTolerance = 1e-9;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::vector<std::vector<int>> HandleSet::partition() const {
  std::vector<std::vector<int>> out;
  out.reserve(handles.size());
  for (const auto& h : handles) out.push_back(h.vertices);
  return out;
}

void validate_partition(const std::vector<std::vector<int>>& partition, std::size_t vertex_count) {
  if (partition.empty()) throw Error(ErrorCode::InvalidHandles, "at least one handle is required");
  std::vector<int> owner(vertex_count, -1);
  std::size_t used = 0;
  for (std::size_t k = 0; k < partition.size(); ++k) {
    if (partition[k].empty()) throw Error(ErrorCode::InvalidHandles, "handle " + std::to_string(k) + " is empty");
    for (int v : partition[k]) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertex_count)
        throw Error(ErrorCode::InvalidHandles, "handle " + std::to_string(k) + " references missing vertex " + std::to_string(v));
      auto& o = owner[static_cast<std::size_t>(v)];
      if (o == static_cast<int>(k))
        throw Error(ErrorCode::InvalidHandles, "handle " + std::to_string(k) + " lists vertex " + std::to_string(v) + " twice");
      if (o >= 0)
        throw Error(ErrorCode::InvalidHandles, "handles " + std::to_string(o) + " and " + std::to_string(k) +
                                                   " overlap at vertex " + std::to_string(v));
      o = static_cast<int>(k);
      ++used;
    }
  }
  if (used >= vertex_count) throw Error(ErrorCode::InvalidHandles, "no free vertices");
}

void validate_handles(const HandleSet& handles, std::size_t vertex_count) {
  validate_partition(handles.partition(), vertex_count);
  for (const auto& h : handles.handles) {
    const auto& tf = h.transform;
    if (std::abs(tf.rotation.norm() - 1.0) > kUnitTolerance)
      throw Error(ErrorCode::InvalidArgument, "handle '" + h.name + "' has a non-unit quaternion");
    if (!(tf.scale > 0.0) || !std::isfinite(tf.scale))
      throw Error(ErrorCode::InvalidArgument, "handle '" + h.name + "' needs a positive scale");
    if (!tf.translation.allFinite() || (tf.pivot && !tf.pivot->allFinite()))
      throw Error(ErrorCode::InvalidArgument, "handle '" + h.name + "' has a non-finite transform");
  }
}

VertexPartition::VertexPartition(std::size_t vertex_count, std::vector<int> constrained)
    : constrained_(std::move(constrained)), slot_(vertex_count, 0) {
  std::sort(constrained_.begin(), constrained_.end());
  constrained_.erase(std::unique(constrained_.begin(), constrained_.end()), constrained_.end());
  for (std::size_t c = 0; c < constrained_.size(); ++c) {
    const int v = constrained_[c];
    if (v < 0 || static_cast<std::size_t>(v) >= vertex_count)
      throw Error(ErrorCode::InvalidHandles, "constrained vertex " + std::to_string(v) + " out of range");
    slot_[static_cast<std::size_t>(v)] = -static_cast<int>(c) - 1;
  }
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (slot_[v] < 0) continue;
    slot_[v] = static_cast<int>(free_.size());
    free_.push_back(static_cast<int>(v));
  }
  hash_ = fnv1a(0xcbf29ce484222325ull, vertex_count);
  for (int v : constrained_) hash_ = fnv1a(hash_, static_cast<std::uint64_t>(v));
}

void VertexPartition::require_anchored(const Mesh& mesh) const {
  std::vector<char> anchored(static_cast<std::size_t>(mesh.component_count()), 0);
  const auto& comp = mesh.vertex_components();
  for (int v : constrained_) anchored[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = 1;
  for (std::size_t c = 0; c < anchored.size(); ++c) {
    if (anchored[c]) continue;
    const auto it = std::find(comp.begin(), comp.end(), static_cast<int>(c));
    throw Error(ErrorCode::SingularSystem, "connected component " + std::to_string(c) + " (containing vertex " +
                                               std::to_string(it - comp.begin()) + ") has no constrained vertex");
  }
}

VertexPartition make_partition(std::size_t vertex_count, const std::vector<std::vector<int>>& handle_vertices) {
  std::vector<int> all;
  for (const auto& h : handle_vertices) all.insert(all.end(), h.begin(), h.end());
  return VertexPartition(vertex_count, std::move(all));
}

HarmonicWeights solve_harmonic_weights(const Mesh& mesh, const SparseOperator& laplacian,
                                       const std::vector<std::vector<int>>& partition) {
  validate_partition(partition, mesh.vertex_count());
  const VertexPartition split = make_partition(mesh.vertex_count(), partition);
  split.require_anchored(mesh);

  const auto nf = static_cast<Eigen::Index>(split.free().size());
  const auto nc = static_cast<Eigen::Index>(split.constrained().size());
  const auto m = static_cast<Eigen::Index>(partition.size());

  std::vector<Triplet> ff, fc;
  const SparseMatrix& l = laplacian.matrix();
  for (Eigen::Index col = 0; col < l.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(l, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (split.is_constrained(r)) continue;
      if (split.is_constrained(c))
        fc.emplace_back(split.free_index(r), -split.free_index(c) - 1, it.value());
      else
        ff.emplace_back(split.free_index(r), split.free_index(c), it.value());
    }
  }
  SparseMatrix lff(nf, nf), lfc(nf, nc);
  lff.setFromTriplets(ff.begin(), ff.end());
  lfc.setFromTriplets(fc.begin(), fc.end());

  // Dirichlet values at constrained vertices, one column per handle.
  Eigen::MatrixXd hc = Eigen::MatrixXd::Zero(nc, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (int v : partition[static_cast<std::size_t>(k)]) hc(-split.free_index(v) - 1, k) = 1.0;

  HarmonicWeights w;
  w.vertex = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.vertex_count()), m);
  for (std::size_t c = 0; c < split.constrained().size(); ++c)
    w.vertex.row(split.constrained()[c]) = hc.row(static_cast<Eigen::Index>(c));

  if (nf > 0) {
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(lff);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::SingularSystem, "reduced Laplacian is not positive definite");
    const Eigen::MatrixXd rhs = -(lfc * hc);
    const Eigen::MatrixXd hf = llt.solve(rhs);
    for (Eigen::Index i = 0; i < nf; ++i) w.vertex.row(split.free()[static_cast<std::size_t>(i)]) = hf.row(i);
  }

  w.triangle.resize(static_cast<Eigen::Index>(mesh.triangle_count()), m);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    w.triangle.row(static_cast<Eigen::Index>(t)) = (w.vertex.row(tri[0]) + w.vertex.row(tri[1]) + w.vertex.row(tri[2])) / 3.0;
  }
  return w;
}

Quaternion blend_rotation(const HarmonicWeights& weights, const HandleSet& handles, std::size_t t) {
  const auto row = weights.triangle.row(static_cast<Eigen::Index>(t));
  if (row.size() != static_cast<Eigen::Index>(handles.size()))
    throw Error(ErrorCode::InvalidArgument, "weight columns do not match handle count");
  Eigen::Index dominant = 0;
  row.maxCoeff(&dominant);
  const Eigen::Vector4d reference = handles.handles[static_cast<std::size_t>(dominant)].transform.rotation.coeffs();

  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  for (Eigen::Index k = 0; k < row.size(); ++k) {
    Eigen::Vector4d q = handles.handles[static_cast<std::size_t>(k)].transform.rotation.coeffs();
    if (q.dot(reference) < 0.0) q = -q;
    sum += row[k] * q;
  }
  const double n = sum.norm();
  if (n < kCancellationTolerance)
    throw Error(ErrorCode::BlendCancellation, "blended rotation cancels on triangle " + std::to_string(t) +
                                                  "; use less opposed handle rotations");
  Quaternion q;
  q.coeffs() = sum / n;
  return q;
}

Mat3 blend_transforms(const HarmonicWeights& weights, const HandleSet& handles, std::size_t t) {
  const Quaternion q = blend_rotation(weights, handles, t);
  const auto row = weights.triangle.row(static_cast<Eigen::Index>(t));
  double scale = 0.0;
  for (Eigen::Index k = 0; k < row.size(); ++k) scale += row[k] * handles.handles[static_cast<std::size_t>(k)].transform.scale;
  return scale * q.toRotationMatrix();
}

GuidanceField build_guidance(const Mesh& rest, const SparseOperator& gradient, const HarmonicWeights& weights,
                             const HandleSet& handles) {
  const Eigen::Matrix<double, Eigen::Dynamic, 3> rest_gradients = gradient.matrix() * rest.vertices();
  GuidanceField z;
  z.blocks.resize(rest_gradients.rows(), 3);
  for (std::size_t t = 0; t < rest.triangle_count(); ++t) {
    const auto r = 3 * static_cast<Eigen::Index>(t);
    z.blocks.middleRows<3>(r) = rest_gradients.middleRows<3>(r) * blend_transforms(weights, handles, t).transpose();
  }
  return z;
}

Vec3 handle_pivot(const Mesh& rest, const Handle& handle) {
  if (handle.transform.pivot) return *handle.transform.pivot;
  Vec3 c = Vec3::Zero();
  for (int v : handle.vertices) c += rest.vertex(v);
  return c / static_cast<double>(handle.vertices.size());
}

Constraints constrained_positions(const Mesh& rest, const HandleSet& handles) {
  std::vector<std::pair<int, Vec3>> moved;
  for (const auto& h : handles.handles) {
    const Vec3 pivot = handle_pivot(rest, h);
    const Mat3 m = h.transform.linear();
    for (int v : h.vertices) moved.emplace_back(v, m * (rest.vertex(v) - pivot) + pivot + h.transform.translation);
  }
  std::sort(moved.begin(), moved.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Constraints out;
  out.positions.resize(static_cast<Eigen::Index>(moved.size()), 3);
  for (std::size_t i = 0; i < moved.size(); ++i) {
    out.vertices.push_back(moved[i].first);
    out.positions.row(static_cast<Eigen::Index>(i)) = moved[i].second.transpose();
  }
  return out;
}

}  // namespace harmonica
