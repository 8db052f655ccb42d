#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

#include "harmonica/mesh.hpp"

namespace harmonica {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Immutable sparse operator. Entries with magnitude below 1e-14 are pruned.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(SparseMatrix matrix, bool symmetric = false);
  static SparseOperator from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& entries,
                                      bool symmetric = false);
  static SparseOperator diagonal(const Eigen::VectorXd& values);

  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }
  Eigen::Index nonzeros() const { return matrix_.nonZeros(); }
  bool symmetric() const { return symmetric_; }
  const SparseMatrix& matrix() const { return matrix_; }

  std::vector<Triplet> entries() const;

 private:
  SparseMatrix matrix_;
  bool symmetric_ = false;
};

enum class OperatorKind : std::uint8_t { Flat, Curved };

const char* to_string(OperatorKind kind);

// W_beta = (1 - beta) A + beta Dk^T B Dk, sized 3|T| x 3|T|.
struct WeightedNorm {
  double beta = 0.0;
  OperatorKind kind = OperatorKind::Curved;
  SparseOperator matrix;
};

// Gradient of the linear function with vertex values (u_i, u_j, u_k) on
// triangle t, as a 3x3 matrix acting on those values.
Mat3 local_gradient(const Mesh& mesh, std::size_t t);

// 3|T| x |V|; rows 3t..3t+2 hold the world-space gradient of triangle t.
SparseOperator assemble_gradient(const Mesh& mesh);

struct Masses {
  SparseOperator triangle_areas;      // A: 3|T| x 3|T|
  SparseOperator edge_lengths;        // B: 3|E_i| x 3|E_i|
  SparseOperator edge_lengths_scalar; // B for one-dimensional local energies
};

Masses assemble_masses(const Mesh& mesh, const EdgeTopology& topo);

// L = G^T A G.
SparseOperator assemble_laplacian(const SparseOperator& gradient, const SparseOperator& areas);

// D (x) I_n: block row e computes E_l(e) - E_r(e).
SparseOperator assemble_diff_flat(const EdgeTopology& topo, std::size_t triangle_count, int block_dim);

// Minimal rotation taking the left normal onto the right normal of an internal edge.
Mat3 edge_rotation(const Mesh& mesh, const EdgeTopology& topo, int edge);

// D^R: block row e computes R_e E_l(e) - E_r(e).
SparseOperator assemble_diff_curved(const Mesh& mesh, const EdgeTopology& topo);

WeightedNorm assemble_norm(const SparseOperator& areas, const SparseOperator& diff, const SparseOperator& edge_lengths,
                           double beta, OperatorKind kind);

// Throws InvalidBeta unless beta is in [0, 1).
void check_beta(double beta);

// Everything assembled once per rest mesh.
struct OperatorSet {
  SparseOperator gradient;
  Masses masses;
  SparseOperator laplacian;
  SparseOperator diff_flat;    // D (x) I_3
  SparseOperator diff_curved;  // D^R

  const SparseOperator& diff(OperatorKind kind) const {
    return kind == OperatorKind::Flat ? diff_flat : diff_curved;
  }
  WeightedNorm norm(double beta, OperatorKind kind) const;
};

OperatorSet assemble_operators(const Mesh& mesh, const EdgeTopology& topo);

}  // namespace harmonica
