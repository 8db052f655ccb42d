#include "harmonica/operators.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

constexpr double kPruneTolerance = 1e-14;
constexpr double kParallelTolerance = 1e-9;

}  // namespace

SparseOperator::SparseOperator(SparseMatrix matrix, bool symmetric)
    : matrix_(std::move(matrix)), symmetric_(symmetric) {
  matrix_.prune([](Eigen::Index, Eigen::Index, double v) { return std::abs(v) >= kPruneTolerance; });
  matrix_.makeCompressed();
}

SparseOperator SparseOperator::from_triplets(Eigen::Index rows, Eigen::Index cols,
                                             const std::vector<Triplet>& entries, bool symmetric) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(entries.begin(), entries.end());
  return SparseOperator(std::move(m), symmetric);
}

SparseOperator SparseOperator::diagonal(const Eigen::VectorXd& values) {
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) entries.emplace_back(i, i, values[i]);
  return from_triplets(values.size(), values.size(), entries, true);
}

std::vector<Triplet> SparseOperator::entries() const {
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(matrix_.nonZeros()));
  for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) out.emplace_back(it.row(), it.col(), it.value());
  return out;
}

const char* to_string(OperatorKind kind) { return kind == OperatorKind::Flat ? "flat" : "curved"; }

Mat3 local_gradient(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangle(t);
  const Vec3 xi = mesh.vertex(tri[0]);
  Mat3 frame;
  frame.row(0) = (mesh.vertex(tri[1]) - xi).transpose();
  frame.row(1) = (mesh.vertex(tri[2]) - xi).transpose();
  frame.row(2) = mesh.normal(t).transpose();

  Mat3 inverse;
  bool invertible = false;
  frame.computeInverseWithCheck(inverse, invertible, 0.0);
  if (!invertible || !inverse.allFinite())
    throw Error(ErrorCode::DegenerateTriangle, "singular gradient frame for triangle " + std::to_string(t));

  Mat3 selector;
  selector << -1, 1, 0,
              -1, 0, 1,
               0, 0, 0;
  return inverse * selector;
}

SparseOperator assemble_gradient(const Mesh& mesh) {
  const auto nt = static_cast<Eigen::Index>(mesh.triangle_count());
  std::vector<Triplet> entries;
  entries.reserve(mesh.triangle_count() * 9);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const Mat3 g = local_gradient(mesh, static_cast<std::size_t>(t));
    const auto& tri = mesh.triangle(static_cast<std::size_t>(t));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) entries.emplace_back(3 * t + r, tri[c], g(r, c));
  }
  return SparseOperator::from_triplets(3 * nt, static_cast<Eigen::Index>(mesh.vertex_count()), entries);
}

Masses assemble_masses(const Mesh& mesh, const EdgeTopology& topo) {
  const auto nt = static_cast<Eigen::Index>(mesh.triangle_count());
  const auto ne = static_cast<Eigen::Index>(topo.internal_edges.size());
  Eigen::VectorXd areas(3 * nt);
  for (Eigen::Index t = 0; t < nt; ++t) areas.segment<3>(3 * t).setConstant(mesh.area(static_cast<std::size_t>(t)));
  Eigen::VectorXd lengths(3 * ne);
  Eigen::VectorXd scalar_lengths(ne);
  for (const auto& e : topo.internal_edges) {
    lengths.segment<3>(3 * e.id).setConstant(e.length);
    scalar_lengths[e.id] = e.length;
  }
  return {SparseOperator::diagonal(areas), SparseOperator::diagonal(lengths),
          SparseOperator::diagonal(scalar_lengths)};
}

SparseOperator assemble_laplacian(const SparseOperator& gradient, const SparseOperator& areas) {
  if (areas.rows() != gradient.rows() || areas.cols() != gradient.rows())
    throw Error(ErrorCode::InvalidArgument, "area matrix does not match gradient rows");
  const SparseMatrix& g = gradient.matrix();
  SparseMatrix l = SparseMatrix(g.transpose()) * (areas.matrix() * g);
  SparseMatrix sym = 0.5 * (l + SparseMatrix(l.transpose()));
  return SparseOperator(std::move(sym), true);
}

SparseOperator assemble_diff_flat(const EdgeTopology& topo, std::size_t triangle_count, int block_dim) {
  if (block_dim < 1) throw Error(ErrorCode::InvalidArgument, "block dimension must be positive");
  const Eigen::Index n = block_dim;
  std::vector<Triplet> entries;
  entries.reserve(topo.internal_edges.size() * 2 * static_cast<std::size_t>(n));
  for (const auto& e : topo.internal_edges) {
    for (Eigen::Index c = 0; c < n; ++c) {
      entries.emplace_back(n * e.id + c, n * e.left + c, 1.0);
      entries.emplace_back(n * e.id + c, n * e.right + c, -1.0);
    }
  }
  return SparseOperator::from_triplets(n * static_cast<Eigen::Index>(topo.internal_edges.size()),
                                       n * static_cast<Eigen::Index>(triangle_count), entries);
}

Mat3 edge_rotation(const Mesh& mesh, const EdgeTopology& topo, int edge) {
  if (edge < 0 || static_cast<std::size_t>(edge) >= topo.internal_edges.size())
    throw Error(ErrorCode::InvalidArgument, "edge " + std::to_string(edge) + " is not an internal edge");
  const auto& e = topo.internal_edges[static_cast<std::size_t>(edge)];
  const Vec3& nl = mesh.normal(static_cast<std::size_t>(e.left));
  const Vec3& nr = mesh.normal(static_cast<std::size_t>(e.right));

  const double cosine = nl.dot(nr);
  if (cosine < -1.0 + kParallelTolerance) {
    const Vec3 axis = (mesh.vertex(e.vertices[1]) - mesh.vertex(e.vertices[0])).normalized();
    return Eigen::AngleAxisd(M_PI, axis).toRotationMatrix();
  }
  const Vec3 axis = nl.cross(nr);
  const double sine = axis.norm();
  if (sine < kParallelTolerance) return Mat3::Identity();
  return Eigen::AngleAxisd(std::atan2(sine, cosine), axis / sine).toRotationMatrix();
}

SparseOperator assemble_diff_curved(const Mesh& mesh, const EdgeTopology& topo) {
  std::vector<Triplet> entries;
  entries.reserve(topo.internal_edges.size() * 12);
  for (const auto& e : topo.internal_edges) {
    const Mat3 r = edge_rotation(mesh, topo, e.id);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) entries.emplace_back(3 * e.id + i, 3 * e.left + j, r(i, j));
      entries.emplace_back(3 * e.id + i, 3 * e.right + i, -1.0);
    }
  }
  return SparseOperator::from_triplets(3 * static_cast<Eigen::Index>(topo.internal_edges.size()),
                                       3 * static_cast<Eigen::Index>(mesh.triangle_count()), entries);
}

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw Error(ErrorCode::InvalidBeta, "beta must lie in [0, 1), got " + std::to_string(beta));
}

WeightedNorm assemble_norm(const SparseOperator& areas, const SparseOperator& diff, const SparseOperator& edge_lengths,
                           double beta, OperatorKind kind) {
  check_beta(beta);
  if (diff.cols() != areas.rows() || edge_lengths.rows() != diff.rows())
    throw Error(ErrorCode::InvalidArgument, "norm operands have mismatched dimensions");
  if (beta == 0.0) return {beta, kind, areas};

  const SparseMatrix& d = diff.matrix();
  SparseMatrix smooth = SparseMatrix(d.transpose()) * (edge_lengths.matrix() * d);
  SparseMatrix w = (1.0 - beta) * areas.matrix() + beta * smooth;
  SparseMatrix sym = 0.5 * (w + SparseMatrix(w.transpose()));
  return {beta, kind, SparseOperator(std::move(sym), true)};
}

WeightedNorm OperatorSet::norm(double beta, OperatorKind kind) const {
  return assemble_norm(masses.triangle_areas, diff(kind), masses.edge_lengths, beta, kind);
}

OperatorSet assemble_operators(const Mesh& mesh, const EdgeTopology& topo) {
  OperatorSet ops;
  ops.gradient = assemble_gradient(mesh);
  ops.masses = assemble_masses(mesh, topo);
  ops.laplacian = assemble_laplacian(ops.gradient, ops.masses.triangle_areas);
  ops.diff_flat = assemble_diff_flat(topo, mesh.triangle_count(), 3);
  ops.diff_curved = assemble_diff_curved(mesh, topo);
  return ops;
}

}  // namespace harmonica
