#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>

#include <Eigen/CholmodSupport>

#include "harmonica/guidance.hpp"
#include "harmonica/operators.hpp"

namespace harmonica {

// Process-wide instrumentation; safe to update from concurrent solves.
struct SolverCounters {
  std::atomic<std::uint64_t> factorizations{0};
  std::atomic<std::uint64_t> solves{0};
  std::atomic<std::uint64_t> factorize_ns{0};
  std::atomic<std::uint64_t> solve_ns{0};
};

SolverCounters& solver_counters();

// Factorized reduced normal equations G_f^T W G_f for one (mesh, partition,
// beta, operator kind). Read-only after construction; solve may be called
// concurrently (CHOLMOD's workspace is guarded by an internal mutex).
class SolverContext {
 public:
  using Factorization = Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>;

  const VertexPartition& partition() const { return partition_; }
  double beta() const { return beta_; }
  OperatorKind kind() const { return kind_; }
  double factorize_ms() const { return factorize_ms_; }
  const SparseMatrix& reduced_matrix() const { return k_ff_; }

 private:
  friend std::shared_ptr<const SolverContext> factorize(const Mesh&, const SparseOperator&, const WeightedNorm&,
                                                        const VertexPartition&);
  friend Positions solve(const SolverContext&, const Eigen::Matrix<double, Eigen::Dynamic, 3>&, const Constraints&,
                         double*);

  SolverContext(VertexPartition partition) : partition_(std::move(partition)) {}

  VertexPartition partition_;
  double beta_ = 0.0;
  OperatorKind kind_ = OperatorKind::Curved;
  SparseMatrix k_ff_;
  SparseMatrix k_fc_;
  SparseMatrix gt_w_free_;  // G_f^T W, |F| x 3|T|
  Factorization llt_;
  mutable std::mutex solve_mutex_;
  double factorize_ms_ = 0.0;
};

// Throws InvalidBeta, or SingularSystem when a component is unconstrained or
// the reduced matrix is not positive definite.
std::shared_ptr<const SolverContext> factorize(const Mesh& mesh, const SparseOperator& gradient,
                                               const WeightedNorm& norm, const VertexPartition& partition);

// Returns all vertex positions; constrained rows are copied from `constraints`.
// `relative_residual`, when given, receives ||K_ff X_f - rhs|| / ||rhs||.
Positions solve(const SolverContext& ctx, const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance,
                const Constraints& constraints, double* relative_residual = nullptr);

struct Energies {
  double prescribed = 0.0;  // E_P
  double regularizer = 0.0; // E_R
  double total = 0.0;       // E_beta
};

Energies total_energies(const SparseOperator& gradient, const WeightedNorm& norm, const SparseOperator& areas,
                        const SparseOperator& diff, const SparseOperator& edge_lengths, const Positions& positions,
                        const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance);
Energies total_energies(const SparseOperator& gradient, double beta, const SparseOperator& areas,
                        const SparseOperator& diff, const SparseOperator& edge_lengths, const Positions& positions,
                        const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance);

}  // namespace harmonica
