#pragma once

#include <array>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "harmonica/guidance.hpp"
#include "harmonica/metrics.hpp"
#include "harmonica/solver.hpp"

namespace harmonica {

// Rest mesh with its topology and operators, assembled once.
class Model {
 public:
  explicit Model(Mesh mesh);

  const Mesh& mesh() const { return mesh_; }
  const EdgeTopology& topology() const { return topology_; }
  const OperatorSet& operators() const { return operators_; }

 private:
  Mesh mesh_;
  EdgeTopology topology_;
  OperatorSet operators_;
};

struct DeformationOutput {
  double beta = 0.0;
  OperatorKind kind = OperatorKind::Curved;
  Positions positions;
  GuidanceField guidance;
  TriangleField energy;
  std::vector<std::array<double, 2>> singular_values;
  DistortionErrors errors;
  Energies energies;
  double p95 = 0.0;
  double factorize_ms = 0.0;
  double solve_ms = 0.0;
  double residual = 0.0;
  bool cache_hit = false;
};

// Harmonic weights and solver contexts for one handle partition. Contexts
// are cached per (beta, operator kind) and factorized at most once; all
// members are safe to call concurrently.
class Deformer {
 public:
  Deformer(std::shared_ptr<const Model> model, std::vector<std::vector<int>> partition);

  const Model& model() const { return *model_; }
  const std::vector<std::vector<int>>& handle_vertices() const { return handle_vertices_; }
  const VertexPartition& partition() const { return partition_; }
  const HarmonicWeights& weights() const { return weights_; }

  std::shared_ptr<const SolverContext> context(double beta, OperatorKind kind, bool* cache_hit = nullptr) const;

  // Throws PartitionMismatch when the handles' vertex sets differ from the
  // partition this deformer was built for.
  DeformationOutput deform(const HandleSet& handles, double beta, OperatorKind kind) const;

  std::uint64_t factorization_count() const;
  std::size_t cached_contexts() const;

 private:
  using Key = std::pair<double, OperatorKind>;
  using Entry = std::shared_future<std::shared_ptr<const SolverContext>>;

  std::shared_ptr<const Model> model_;
  std::vector<std::vector<int>> handle_vertices_;
  VertexPartition partition_;
  HarmonicWeights weights_;

  mutable std::mutex cache_mutex_;
  mutable std::map<Key, Entry> cache_;
  mutable std::uint64_t factorizations_ = 0;
};

// Parallelism cap from HARMONICA_THREADS (at least 1; hardware concurrency when unset).
int thread_limit();

const std::vector<double>& default_beta_grid();

// One factorization and solve per beta; rows are independent and may run on
// up to `threads` workers. Betas must be strictly increasing within [0, 1).
SweepResult beta_sweep(const Deformer& deformer, const HandleSet& handles, OperatorKind kind,
                       const std::vector<double>& betas, int threads = 1);

struct OperatorComparison {
  DeformationOutput flat;
  DeformationOutput curved;
  Positions difference;  // curved - flat
  double max_difference = 0.0;
};

OperatorComparison compare_operators(const Deformer& deformer, const HandleSet& handles, double beta);

}  // namespace harmonica
