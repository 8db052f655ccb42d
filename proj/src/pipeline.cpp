#include "harmonica/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include "harmonica/error.hpp"

namespace harmonica {

Model::Model(Mesh mesh)
    : mesh_(std::move(mesh)), topology_(build_topology(mesh_)), operators_(assemble_operators(mesh_, topology_)) {}

Deformer::Deformer(std::shared_ptr<const Model> model, std::vector<std::vector<int>> partition)
    : model_(std::move(model)),
      handle_vertices_(std::move(partition)),
      partition_((validate_partition(handle_vertices_, model_->mesh().vertex_count()),
                  make_partition(model_->mesh().vertex_count(), handle_vertices_))),
      weights_(solve_harmonic_weights(model_->mesh(), model_->operators().laplacian, handle_vertices_)) {}

std::shared_ptr<const SolverContext> Deformer::context(double beta, OperatorKind kind, bool* cache_hit) const {
  check_beta(beta);
  const Key key{beta, kind};
  std::promise<std::shared_ptr<const SolverContext>> promise;
  Entry entry;
  bool owner = false;
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      entry = promise.get_future().share();
      cache_.emplace(key, entry);
      owner = true;
    } else {
      entry = it->second;
    }
  }
  if (cache_hit) *cache_hit = !owner;
  if (owner) {
    try {
      const auto& ops = model_->operators();
      auto ctx = factorize(model_->mesh(), ops.gradient, ops.norm(beta, kind), partition_);
      {
        std::lock_guard lock(cache_mutex_);
        ++factorizations_;
      }
      promise.set_value(std::move(ctx));
    } catch (...) {
      {
        std::lock_guard lock(cache_mutex_);
        cache_.erase(key);
      }
      promise.set_exception(std::current_exception());
    }
  }
  return entry.get();
}

std::uint64_t Deformer::factorization_count() const {
  std::lock_guard lock(cache_mutex_);
  return factorizations_;
}

std::size_t Deformer::cached_contexts() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

DeformationOutput Deformer::deform(const HandleSet& handles, double beta, OperatorKind kind) const {
  const Mesh& mesh = model_->mesh();
  validate_handles(handles, mesh.vertex_count());
  if (handles.partition() != handle_vertices_)
    throw Error(ErrorCode::PartitionMismatch, "handle vertex sets differ from the configured partition");

  DeformationOutput out;
  out.beta = beta;
  out.kind = kind;
  const auto ctx = context(beta, kind, &out.cache_hit);
  out.factorize_ms = out.cache_hit ? 0.0 : ctx->factorize_ms();

  const auto& ops = model_->operators();
  const auto start = std::chrono::steady_clock::now();
  out.guidance = build_guidance(mesh, ops.gradient, weights_, handles);
  out.positions = solve(*ctx, out.guidance.blocks, constrained_positions(mesh, handles), &out.residual);
  out.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  out.energy = local_energy(ops.gradient, out.positions, out.guidance.blocks);
  out.p95 = percentile95(out.energy);
  out.energies = total_energies(ops.gradient, beta, ops.masses.triangle_areas, ops.diff(kind), ops.masses.edge_lengths,
                                out.positions, out.guidance.blocks);
  out.singular_values.reserve(mesh.triangle_count());
  for (const auto& tri : mesh.triangles()) {
    const auto dg = deformation_gradient_2x2(tri, mesh.vertices(), out.positions);
    out.singular_values.push_back({dg.sigma_max, dg.sigma_min});
  }
  out.errors = iso_conf_errors(out.singular_values);
  return out;
}

int thread_limit() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HARMONICA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 1024));
  }
  return static_cast<int>(hw);
}

const std::vector<double>& default_beta_grid() {
  static const std::vector<double> grid = {0.0, 0.003, 0.01, 0.03, 0.1, 0.2, 0.4, 0.7, 0.9};
  return grid;
}

SweepResult beta_sweep(const Deformer& deformer, const HandleSet& handles, OperatorKind kind,
                       const std::vector<double>& betas, int threads) {
  if (betas.empty()) throw Error(ErrorCode::InvalidArgument, "beta list is empty");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    check_beta(betas[i]);
    if (i > 0 && !(betas[i] > betas[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "beta list must be strictly increasing");
  }

  SweepResult result;
  result.rows.resize(betas.size());
  std::vector<std::exception_ptr> failures(betas.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < betas.size(); i = next++) {
      try {
        const auto out = deformer.deform(handles, betas[i], kind);
        auto& row = result.rows[i];
        row.beta = betas[i];
        row.max_iso = out.errors.max_isometric;
        row.max_conf = out.errors.max_conformal;
        row.e_p = out.energies.prescribed;
        row.e_r = out.energies.regularizer;
        row.e_total = out.energies.total;
        row.factorize_ms = out.factorize_ms;
        row.solve_ms = out.solve_ms;
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const int workers = std::clamp(threads, 1, static_cast<int>(betas.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return result;
}

OperatorComparison compare_operators(const Deformer& deformer, const HandleSet& handles, double beta) {
  OperatorComparison cmp;
  cmp.flat = deformer.deform(handles, beta, OperatorKind::Flat);
  cmp.curved = deformer.deform(handles, beta, OperatorKind::Curved);
  cmp.difference = cmp.curved.positions - cmp.flat.positions;
  cmp.max_difference = cmp.difference.rowwise().norm().maxCoeff();
  return cmp;
}

}  // namespace harmonica
