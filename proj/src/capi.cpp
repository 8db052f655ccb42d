#include "harmonica/harmonica.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "harmonica/error.hpp"
#include "harmonica/io.hpp"
#include "harmonica/pipeline.hpp"
#include "harmonica/scenario.hpp"

using namespace harmonica;

struct hm_mesh {
  Mesh mesh;
};

struct hm_scenario {
  Scenario scenario;
  std::shared_ptr<const Deformer> deformer;  // shared by all runs on this scenario

  explicit hm_scenario(Scenario sc)
      : scenario(std::move(sc)),
        deformer(std::make_shared<Deformer>(scenario.model, scenario.handles.partition())) {}
};

struct hm_result {
  std::shared_ptr<const Model> model;
  DeformationOutput output;
};

struct hm_sweep {
  SweepResult sweep;
};

struct hm_comparison {
  hm_result flat;
  hm_result curved;
  Positions difference;
  double max_difference = 0.0;
};

namespace {

thread_local std::string last_error;

hm_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return HM_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return HM_ERR_IO;
    case ErrorCode::MalformedVertex: return HM_ERR_MALFORMED_VERTEX;
    case ErrorCode::MalformedFace: return HM_ERR_MALFORMED_FACE;
    case ErrorCode::IndexOutOfRange: return HM_ERR_INDEX_OUT_OF_RANGE;
    case ErrorCode::DegenerateTriangle: return HM_ERR_DEGENERATE_TRIANGLE;
    case ErrorCode::NonManifold: return HM_ERR_NON_MANIFOLD;
    case ErrorCode::SingularSystem: return HM_ERR_SINGULAR_SYSTEM;
    case ErrorCode::InvalidBeta: return HM_ERR_INVALID_BETA;
    case ErrorCode::InvalidHandles: return HM_ERR_INVALID_HANDLES;
    case ErrorCode::BlendCancellation: return HM_ERR_BLEND_CANCELLATION;
    case ErrorCode::PartitionMismatch: return HM_ERR_PARTITION_MISMATCH;
    case ErrorCode::Scenario: return HM_ERR_SCENARIO;
  }
  return HM_ERR_INTERNAL;
}

template <typename F>
hm_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return HM_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HM_ERR_INTERNAL;
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::InvalidArgument, what);
}

void copy_positions(const Positions& p, double* out, size_t capacity) {
  require(out != nullptr, "output buffer is null");
  require(capacity >= static_cast<size_t>(3 * p.rows()), "output buffer too small");
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (int c = 0; c < 3; ++c) out[3 * i + c] = p(i, c);
}

hm_operator to_c(OperatorKind kind) { return kind == OperatorKind::Flat ? HM_OPERATOR_FLAT : HM_OPERATOR_CURVED; }

OperatorKind from_c(hm_operator op) {
  if (op == HM_OPERATOR_FLAT) return OperatorKind::Flat;
  if (op == HM_OPERATOR_CURVED) return OperatorKind::Curved;
  throw Error(ErrorCode::InvalidArgument, "unknown operator kind");
}

std::ofstream open_out(const char* path) {
  require(path != nullptr, "path is null");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, std::string("cannot write '") + path + "'");
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

extern "C" {

const char* hm_version(void) { return "1.0.0"; }

const char* hm_status_string(hm_status status) {
  switch (status) {
    case HM_OK: return "ok";
    case HM_ERR_INTERNAL: return "internal error";
    default: return to_string(static_cast<ErrorCode>(status));
  }
}

const char* hm_last_error(void) { return last_error.c_str(); }

int hm_thread_limit(void) { return thread_limit(); }

hm_status hm_mesh_load_obj(const char* path, hm_mesh** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new hm_mesh{load_obj(path)};
  });
}

hm_status hm_mesh_parse_obj(const char* text, size_t length, hm_mesh** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new hm_mesh{parse_obj(std::string_view(text, length))};
  });
}

void hm_mesh_free(hm_mesh* mesh) { delete mesh; }

size_t hm_mesh_vertex_count(const hm_mesh* mesh) { return mesh ? mesh->mesh.vertex_count() : 0; }
size_t hm_mesh_triangle_count(const hm_mesh* mesh) { return mesh ? mesh->mesh.triangle_count() : 0; }

hm_status hm_mesh_copy_vertices(const hm_mesh* mesh, double* out, size_t capacity) {
  return guarded([&] {
    require(mesh != nullptr, "mesh is null");
    copy_positions(mesh->mesh.vertices(), out, capacity);
  });
}

hm_status hm_mesh_write_obj(const hm_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh != nullptr, "mesh is null");
    auto out = open_out(path);
    write_obj(out, mesh->mesh);
  });
}

hm_status hm_fixture_create(const char* json_params, hm_mesh** out) {
  return guarded([&] {
    require(json_params && out, "null argument");
    *out = new hm_mesh{make_fixture(json_params)};
  });
}

hm_status hm_scenario_load(const char* path, hm_scenario** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new hm_scenario(load_scenario(path));
  });
}

hm_status hm_scenario_parse(const char* json_text, const char* base_dir, hm_scenario** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    *out = new hm_scenario(parse_scenario(json_text, base_dir ? base_dir : "."));
  });
}

void hm_scenario_free(hm_scenario* scenario) { delete scenario; }

hm_status hm_scenario_set_beta(hm_scenario* scenario, double beta) {
  return guarded([&] {
    require(scenario != nullptr, "scenario is null");
    check_beta(beta);
    scenario->scenario.beta = beta;
  });
}

hm_status hm_scenario_set_operator(hm_scenario* scenario, hm_operator op) {
  return guarded([&] {
    require(scenario != nullptr, "scenario is null");
    scenario->scenario.kind = from_c(op);
  });
}

double hm_scenario_beta(const hm_scenario* scenario) { return scenario ? scenario->scenario.beta : 0.0; }

hm_operator hm_scenario_operator(const hm_scenario* scenario) {
  return scenario ? to_c(scenario->scenario.kind) : HM_OPERATOR_CURVED;
}

size_t hm_scenario_handle_count(const hm_scenario* scenario) {
  return scenario ? scenario->scenario.handles.size() : 0;
}

hm_status hm_scenario_write_resolved(const hm_scenario* scenario, const char* path) {
  return guarded([&] {
    require(scenario != nullptr, "scenario is null");
    auto out = open_out(path);
    out << dump_resolved(scenario->scenario);
  });
}

hm_status hm_scenario_dump_operators(const hm_scenario* scenario, const char* dir) {
  return guarded([&] {
    require(scenario && dir, "null argument");
    const std::filesystem::path base(dir);
    const auto& sc = scenario->scenario;
    const auto& ops = sc.model->operators();
    write_matrix_market(base / "G.mtx", ops.gradient);
    write_matrix_market(base / "A.mtx", ops.masses.triangle_areas);
    write_matrix_market(base / "B.mtx", ops.masses.edge_lengths);
    write_matrix_market(base / "L.mtx", ops.laplacian);
    write_matrix_market(base / "D_flat.mtx", ops.diff_flat);
    write_matrix_market(base / "D_curved.mtx", ops.diff_curved);
    write_matrix_market(base / "W.mtx", ops.norm(sc.beta, sc.kind).matrix);
  });
}

hm_status hm_deform(const hm_scenario* scenario, hm_result** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const auto& sc = scenario->scenario;
    auto output = scenario->deformer->deform(sc.handles, sc.beta, sc.kind);
    *out = new hm_result{sc.model, std::move(output)};
  });
}

void hm_result_free(hm_result* result) { delete result; }

hm_status hm_result_summary(const hm_result* result, hm_summary* out) {
  return guarded([&] {
    require(result && out, "null argument");
    const auto& o = result->output;
    const auto& mesh = result->model->mesh();
    *out = hm_summary{o.beta,       to_c(o.kind),    o.energies.prescribed, o.energies.regularizer,
                      o.energies.total, o.errors.max_isometric, o.errors.max_conformal, o.p95,
                      o.factorize_ms, o.solve_ms, o.residual, mesh.bbox_diagonal(),
                      mesh.vertex_count(), mesh.triangle_count()};
  });
}

hm_status hm_result_copy_positions(const hm_result* result, double* out, size_t capacity) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    copy_positions(result->output.positions, out, capacity);
  });
}

hm_status hm_result_write_obj(const hm_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    auto out = open_out(path);
    write_obj(out, result->output.positions, result->model->mesh().triangles());
  });
}

hm_status hm_result_write_ply(const hm_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    auto out = open_out(path);
    const auto colors = colormap(result->output.energy);
    write_colored_ply(out, result->output.positions, result->model->mesh().triangles(), colors);
  });
}

hm_status hm_result_write_metrics_csv(const hm_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    auto out = open_out(path);
    const auto& o = result->output;
    out << "triangle,energy,e_iso,e_conf,sigma_max,sigma_min\n";
    for (std::size_t t = 0; t < o.energy.size(); ++t) {
      out << t << ',' << num(o.energy[t]) << ',' << num(o.errors.isometric[t]) << ',' << num(o.errors.conformal[t])
          << ',' << num(o.singular_values[t][0]) << ',' << num(o.singular_values[t][1]) << '\n';
    }
  });
}

size_t hm_default_betas(double* out, size_t capacity) {
  const auto& grid = default_beta_grid();
  if (out)
    for (size_t i = 0; i < grid.size() && i < capacity; ++i) out[i] = grid[i];
  return grid.size();
}

hm_status hm_sweep_run(const hm_scenario* scenario, const double* betas, size_t count, int threads, hm_sweep** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    require(betas != nullptr || count == 0, "betas is null");
    const auto& sc = scenario->scenario;
    const std::vector<double> list(betas, betas + count);
    *out = new hm_sweep{beta_sweep(*scenario->deformer, sc.handles, sc.kind, list,
                                   threads > 0 ? threads : thread_limit())};
  });
}

void hm_sweep_free(hm_sweep* sweep) { delete sweep; }

size_t hm_sweep_row_count(const hm_sweep* sweep) { return sweep ? sweep->sweep.rows.size() : 0; }

hm_status hm_sweep_get_row(const hm_sweep* sweep, size_t index, hm_sweep_row* out) {
  return guarded([&] {
    require(sweep && out, "null argument");
    require(index < sweep->sweep.rows.size(), "row index out of range");
    const auto& r = sweep->sweep.rows[index];
    *out = hm_sweep_row{r.beta, r.max_iso, r.max_conf, r.e_p, r.e_r, r.e_total, r.factorize_ms, r.solve_ms};
  });
}

hm_status hm_sweep_write_csv(const hm_sweep* sweep, const char* path, int include_timings) {
  return guarded([&] {
    require(sweep != nullptr, "sweep is null");
    auto out = open_out(path);
    write_sweep_csv(out, sweep->sweep, include_timings != 0);
  });
}

hm_status hm_sweep_write_svg(const hm_sweep* sweep, const char* path) {
  return guarded([&] {
    require(sweep != nullptr, "sweep is null");
    auto out = open_out(path);
    write_sweep_svg(out, sweep->sweep);
  });
}

hm_status hm_compare(const hm_scenario* scenario, hm_comparison** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const auto& sc = scenario->scenario;
    auto cmp = compare_operators(*scenario->deformer, sc.handles, sc.beta);
    *out = new hm_comparison{hm_result{sc.model, std::move(cmp.flat)}, hm_result{sc.model, std::move(cmp.curved)},
                             std::move(cmp.difference), cmp.max_difference};
  });
}

void hm_comparison_free(hm_comparison* comparison) { delete comparison; }

double hm_comparison_max_difference(const hm_comparison* comparison) {
  return comparison ? comparison->max_difference : 0.0;
}

const hm_result* hm_comparison_result(const hm_comparison* comparison, hm_operator op) {
  if (!comparison) return nullptr;
  return op == HM_OPERATOR_FLAT ? &comparison->flat : &comparison->curved;
}

hm_status hm_comparison_write_csv(const hm_comparison* comparison, const char* path) {
  return guarded([&] {
    require(comparison != nullptr, "comparison is null");
    auto out = open_out(path);
    out << "vertex,dx,dy,dz,distance\n";
    const auto& d = comparison->difference;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      out << i << ',' << num(d(i, 0)) << ',' << num(d(i, 1)) << ',' << num(d(i, 2)) << ',' << num(d.row(i).norm())
          << '\n';
  });
}

}  // extern "C"
