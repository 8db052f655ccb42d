/* C interface to the harmonica deformation library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Functions return HM_OK on success; on failure
 * hm_last_error() describes the problem for the calling thread. */
#ifndef HARMONICA_H_
#define HARMONICA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HM_API __declspec(dllexport)
#else
#define HM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hm_status {
  HM_OK = 0,
  HM_ERR_INVALID_ARGUMENT = 1,
  HM_ERR_IO = 2,
  HM_ERR_MALFORMED_VERTEX = 3,
  HM_ERR_MALFORMED_FACE = 4,
  HM_ERR_INDEX_OUT_OF_RANGE = 5,
  HM_ERR_DEGENERATE_TRIANGLE = 6,
  HM_ERR_NON_MANIFOLD = 7,
  HM_ERR_SINGULAR_SYSTEM = 8,
  HM_ERR_INVALID_BETA = 9,
  HM_ERR_INVALID_HANDLES = 10,
  HM_ERR_BLEND_CANCELLATION = 11,
  HM_ERR_PARTITION_MISMATCH = 12,
  HM_ERR_SCENARIO = 13,
  HM_ERR_INTERNAL = 99
} hm_status;

typedef enum hm_operator { HM_OPERATOR_FLAT = 0, HM_OPERATOR_CURVED = 1 } hm_operator;

typedef struct hm_mesh hm_mesh;
typedef struct hm_scenario hm_scenario;
typedef struct hm_result hm_result;
typedef struct hm_sweep hm_sweep;
typedef struct hm_comparison hm_comparison;

typedef struct hm_summary {
  double beta;
  hm_operator op;
  double e_p;
  double e_r;
  double e_beta;
  double max_iso;
  double max_conf;
  double p95;
  double factorize_ms;
  double solve_ms;
  double residual;
  double bbox_diagonal;
  size_t vertex_count;
  size_t triangle_count;
} hm_summary;

typedef struct hm_sweep_row {
  double beta;
  double max_iso;
  double max_conf;
  double e_p;
  double e_r;
  double e_total;
  double factorize_ms;
  double solve_ms;
} hm_sweep_row;

HM_API const char* hm_version(void);
HM_API const char* hm_status_string(hm_status status);
/* Message of the last failed call on this thread; empty after success. */
HM_API const char* hm_last_error(void);
/* Parallelism cap (HARMONICA_THREADS, else hardware concurrency). */
HM_API int hm_thread_limit(void);

/* Meshes */
HM_API hm_status hm_mesh_load_obj(const char* path, hm_mesh** out);
HM_API hm_status hm_mesh_parse_obj(const char* text, size_t length, hm_mesh** out);
HM_API void hm_mesh_free(hm_mesh* mesh);
HM_API size_t hm_mesh_vertex_count(const hm_mesh* mesh);
HM_API size_t hm_mesh_triangle_count(const hm_mesh* mesh);
/* Writes 3 * vertex_count doubles (x0 y0 z0 x1 ...). */
HM_API hm_status hm_mesh_copy_vertices(const hm_mesh* mesh, double* out, size_t capacity);
HM_API hm_status hm_mesh_write_obj(const hm_mesh* mesh, const char* path);

/* Fixture names: tetrahedron, planar_grid, cylinder, folded_strip, bar.
 * `json_params` is a fixture description such as {"fixture":"cylinder","rings":40}. */
HM_API hm_status hm_fixture_create(const char* json_params, hm_mesh** out);

/* Scenarios */
HM_API hm_status hm_scenario_load(const char* path, hm_scenario** out);
HM_API hm_status hm_scenario_parse(const char* json_text, const char* base_dir, hm_scenario** out);
HM_API void hm_scenario_free(hm_scenario* scenario);
HM_API hm_status hm_scenario_set_beta(hm_scenario* scenario, double beta);
HM_API hm_status hm_scenario_set_operator(hm_scenario* scenario, hm_operator op);
HM_API double hm_scenario_beta(const hm_scenario* scenario);
HM_API hm_operator hm_scenario_operator(const hm_scenario* scenario);
HM_API size_t hm_scenario_handle_count(const hm_scenario* scenario);
HM_API hm_status hm_scenario_write_resolved(const hm_scenario* scenario, const char* path);
/* Writes G, A, B, L, D (x) I3, D^R and W_beta as MatrixMarket files into `dir`. */
HM_API hm_status hm_scenario_dump_operators(const hm_scenario* scenario, const char* dir);

/* Single deformation with the scenario's beta and operator. */
HM_API hm_status hm_deform(const hm_scenario* scenario, hm_result** out);
HM_API void hm_result_free(hm_result* result);
HM_API hm_status hm_result_summary(const hm_result* result, hm_summary* out);
HM_API hm_status hm_result_copy_positions(const hm_result* result, double* out, size_t capacity);
HM_API hm_status hm_result_write_obj(const hm_result* result, const char* path);
/* Energy colormap, clipped at the 95th percentile. */
HM_API hm_status hm_result_write_ply(const hm_result* result, const char* path);
/* Header: triangle,energy,e_iso,e_conf,sigma_max,sigma_min */
HM_API hm_status hm_result_write_metrics_csv(const hm_result* result, const char* path);

/* Beta sweeps; betas strictly increasing in [0, 1). */
HM_API size_t hm_default_betas(double* out, size_t capacity);
HM_API hm_status hm_sweep_run(const hm_scenario* scenario, const double* betas, size_t count, int threads,
                              hm_sweep** out);
HM_API void hm_sweep_free(hm_sweep* sweep);
HM_API size_t hm_sweep_row_count(const hm_sweep* sweep);
HM_API hm_status hm_sweep_get_row(const hm_sweep* sweep, size_t index, hm_sweep_row* out);
/* include_timings = 0 writes the timing columns as 0 for byte-stable output. */
HM_API hm_status hm_sweep_write_csv(const hm_sweep* sweep, const char* path, int include_timings);
HM_API hm_status hm_sweep_write_svg(const hm_sweep* sweep, const char* path);

/* Flat D vs curved D^R at the scenario's beta. */
HM_API hm_status hm_compare(const hm_scenario* scenario, hm_comparison** out);
HM_API void hm_comparison_free(hm_comparison* comparison);
HM_API double hm_comparison_max_difference(const hm_comparison* comparison);
/* Borrowed; valid until the comparison is freed. */
HM_API const hm_result* hm_comparison_result(const hm_comparison* comparison, hm_operator op);
/* Header: vertex,dx,dy,dz,distance (curved minus flat). */
HM_API hm_status hm_comparison_write_csv(const hm_comparison* comparison, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* HARMONICA_H_ */
