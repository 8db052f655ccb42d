#include "harmonica/solver.hpp"

#include <chrono>
#include <mutex>
#include <string>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t to_ns(double ms) { return static_cast<std::uint64_t>(ms * 1e6); }

}  // namespace

SolverCounters& solver_counters() {
  static SolverCounters counters;
  return counters;
}

std::shared_ptr<const SolverContext> factorize(const Mesh& mesh, const SparseOperator& gradient,
                                               const WeightedNorm& norm, const VertexPartition& partition) {
  check_beta(norm.beta);
  if (partition.vertex_count() != mesh.vertex_count() || gradient.cols() != static_cast<Eigen::Index>(mesh.vertex_count()))
    throw Error(ErrorCode::InvalidArgument, "partition or gradient does not match the mesh");
  if (norm.matrix.rows() != gradient.rows())
    throw Error(ErrorCode::InvalidArgument, "weighted norm does not match gradient rows");
  if (partition.free().empty()) throw Error(ErrorCode::InvalidHandles, "no free vertices");
  partition.require_anchored(mesh);

  const auto start = Clock::now();
  std::shared_ptr<SolverContext> ctx(new SolverContext(partition));
  ctx->beta_ = norm.beta;
  ctx->kind_ = norm.kind;

  // Column selection matrices split G into free and constrained columns.
  const auto nv = static_cast<Eigen::Index>(mesh.vertex_count());
  const auto nf = static_cast<Eigen::Index>(partition.free().size());
  const auto nc = static_cast<Eigen::Index>(partition.constrained().size());
  std::vector<Triplet> pick_free, pick_fixed;
  for (Eigen::Index i = 0; i < nf; ++i) pick_free.emplace_back(partition.free()[static_cast<std::size_t>(i)], i, 1.0);
  for (Eigen::Index i = 0; i < nc; ++i)
    pick_fixed.emplace_back(partition.constrained()[static_cast<std::size_t>(i)], i, 1.0);
  SparseMatrix sel_f(nv, nf), sel_c(nv, nc);
  sel_f.setFromTriplets(pick_free.begin(), pick_free.end());
  sel_c.setFromTriplets(pick_fixed.begin(), pick_fixed.end());

  const SparseMatrix g_f = gradient.matrix() * sel_f;
  const SparseMatrix g_c = gradient.matrix() * sel_c;
  ctx->gt_w_free_ = SparseMatrix(g_f.transpose()) * norm.matrix.matrix();
  ctx->k_ff_ = ctx->gt_w_free_ * g_f;
  ctx->k_fc_ = ctx->gt_w_free_ * g_c;

  ctx->llt_.compute(ctx->k_ff_);
  if (ctx->llt_.info() != Eigen::Success)
    throw Error(ErrorCode::SingularSystem, "reduced normal equations are not positive definite (beta=" +
                                               std::to_string(norm.beta) + ")");
  ctx->factorize_ms_ = elapsed_ms(start);

  auto& counters = solver_counters();
  counters.factorizations.fetch_add(1, std::memory_order_relaxed);
  counters.factorize_ns.fetch_add(to_ns(ctx->factorize_ms_), std::memory_order_relaxed);
  return ctx;
}

Positions solve(const SolverContext& ctx, const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance,
                const Constraints& constraints, double* relative_residual) {
  const auto& partition = ctx.partition();
  const VertexPartition given(partition.vertex_count(), constraints.vertices);
  if (given.hash() != partition.hash() || !(given == partition) ||
      constraints.positions.rows() != static_cast<Eigen::Index>(constraints.vertices.size()))
    throw Error(ErrorCode::PartitionMismatch, "constraints do not match the factorized handle partition");
  if (guidance.rows() != ctx.gt_w_free_.cols())
    throw Error(ErrorCode::InvalidArgument, "guidance field has " + std::to_string(guidance.rows()) +
                                                " rows, expected " + std::to_string(ctx.gt_w_free_.cols()));

  const auto start = Clock::now();
  // Constraint rows reordered to the partition's ascending order.
  Eigen::Matrix<double, Eigen::Dynamic, 3> x_c(static_cast<Eigen::Index>(partition.constrained().size()), 3);
  for (std::size_t i = 0; i < constraints.vertices.size(); ++i)
    x_c.row(-partition.free_index(constraints.vertices[i]) - 1) = constraints.positions.row(static_cast<Eigen::Index>(i));

  const Eigen::Matrix<double, Eigen::Dynamic, 3> rhs = ctx.gt_w_free_ * guidance - ctx.k_fc_ * x_c;
  Eigen::Matrix<double, Eigen::Dynamic, 3> x_f;
  {
    std::lock_guard lock(ctx.solve_mutex_);
    x_f = ctx.llt_.solve(rhs);
  }

  if (relative_residual) {
    const double rhs_norm = rhs.norm();
    const double res = (ctx.k_ff_ * x_f - rhs).norm();
    *relative_residual = rhs_norm > 0.0 ? res / rhs_norm : res;
  }

  Positions x(static_cast<Eigen::Index>(partition.vertex_count()), 3);
  for (std::size_t i = 0; i < partition.free().size(); ++i) x.row(partition.free()[i]) = x_f.row(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < partition.constrained().size(); ++i)
    x.row(partition.constrained()[i]) = x_c.row(static_cast<Eigen::Index>(i));

  auto& counters = solver_counters();
  counters.solves.fetch_add(1, std::memory_order_relaxed);
  counters.solve_ns.fetch_add(to_ns(elapsed_ms(start)), std::memory_order_relaxed);
  return x;
}

Energies total_energies(const SparseOperator& gradient, const WeightedNorm& norm, const SparseOperator& areas,
                        const SparseOperator& diff, const SparseOperator& edge_lengths, const Positions& positions,
                        const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance) {
  return total_energies(gradient, norm.beta, areas, diff, edge_lengths, positions, guidance);
}

Energies total_energies(const SparseOperator& gradient, double beta, const SparseOperator& areas,
                        const SparseOperator& diff, const SparseOperator& edge_lengths, const Positions& positions,
                        const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance) {
  const Eigen::Matrix<double, Eigen::Dynamic, 3> residual = gradient.matrix() * positions - guidance;
  const Eigen::Matrix<double, Eigen::Dynamic, 3> variation = diff.matrix() * residual;
  Energies e;
  e.prescribed = (residual.transpose() * (areas.matrix() * residual)).trace();
  e.regularizer = (variation.transpose() * (edge_lengths.matrix() * variation)).trace();
  e.total = (1.0 - beta) * e.prescribed + beta * e.regularizer;
  return e;
}

}  // namespace harmonica
