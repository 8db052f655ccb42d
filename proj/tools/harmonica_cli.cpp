// Batch front-end over the harmonica C API.
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harmonica/harmonica.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct ScenarioDeleter {
  void operator()(hm_scenario* s) const { hm_scenario_free(s); }
};
struct ResultDeleter {
  void operator()(hm_result* r) const { hm_result_free(r); }
};
struct SweepDeleter {
  void operator()(hm_sweep* s) const { hm_sweep_free(s); }
};
struct ComparisonDeleter {
  void operator()(hm_comparison* c) const { hm_comparison_free(c); }
};
struct MeshDeleter {
  void operator()(hm_mesh* m) const { hm_mesh_free(m); }
};

using ScenarioPtr = std::unique_ptr<hm_scenario, ScenarioDeleter>;

// Thrown to unwind with a specific exit code after printing a diagnostic.
struct Exit {
  int code;
};

void check(hm_status status, const std::string& context) {
  if (status == HM_OK) return;
  std::fprintf(stderr, "harmonica: %s: %s (%s)\n", context.c_str(), hm_last_error(), hm_status_string(status));
  throw Exit{status == HM_ERR_SCENARIO ? kExitUsage : kExitError};
}

struct Options {
  std::string scenario;
  std::optional<double> beta;
  std::string betas;
  std::string op;
  std::string out_dir = ".";
  bool dump_resolved = false;
  bool dump_operators = false;
  bool no_timings = false;
};

ScenarioPtr open_scenario(const Options& opt) {
  hm_scenario* raw = nullptr;
  check(hm_scenario_load(opt.scenario.c_str(), &raw), "loading scenario '" + opt.scenario + "'");
  ScenarioPtr sc(raw);
  if (opt.beta) check(hm_scenario_set_beta(sc.get(), *opt.beta) == HM_OK ? HM_OK : HM_ERR_SCENARIO, "--beta");
  if (!opt.op.empty())
    check(hm_scenario_set_operator(sc.get(), opt.op == "flat" ? HM_OPERATOR_FLAT : HM_OPERATOR_CURVED), "--operator");
  return sc;
}

fs::path output_path(const Options& opt, const std::string& suffix) {
  fs::create_directories(opt.out_dir);
  return fs::path(opt.out_dir) / (fs::path(opt.scenario).stem().string() + suffix);
}

void maybe_dump_resolved(const Options& opt, const hm_scenario* sc) {
  if (!opt.dump_resolved) return;
  const auto path = output_path(opt, ".resolved.json");
  check(hm_scenario_write_resolved(sc, path.c_str()), "writing " + path.string());
  std::printf("resolved scenario: %s\n", path.c_str());
}

void print_summary(const char* label, const hm_summary& s) {
  std::printf("%s beta=%g operator=%s |V|=%zu |T|=%zu\n", label, s.beta, s.op == HM_OPERATOR_FLAT ? "flat" : "curved",
              s.vertex_count, s.triangle_count);
  std::printf("  E_P=%.9g E_R=%.9g E_beta=%.9g\n", s.e_p, s.e_r, s.e_beta);
  std::printf("  max_iso=%.9g max_conf=%.9g p95=%.9g\n", s.max_iso, s.max_conf, s.p95);
  std::printf("  factorize_ms=%.3f solve_ms=%.3f residual=%.3g\n", s.factorize_ms, s.solve_ms, s.residual);
}

int cmd_deform(const Options& opt) {
  auto sc = open_scenario(opt);
  maybe_dump_resolved(opt, sc.get());
  if (opt.dump_operators) {
    fs::create_directories(opt.out_dir);
    check(hm_scenario_dump_operators(sc.get(), opt.out_dir.c_str()), "dumping operators");
  }
  hm_result* raw = nullptr;
  check(hm_deform(sc.get(), &raw), "deforming");
  std::unique_ptr<hm_result, ResultDeleter> result(raw);

  const auto obj = output_path(opt, ".deformed.obj");
  const auto ply = output_path(opt, ".energy.ply");
  const auto csv = output_path(opt, ".metrics.csv");
  check(hm_result_write_obj(result.get(), obj.c_str()), "writing " + obj.string());
  check(hm_result_write_ply(result.get(), ply.c_str()), "writing " + ply.string());
  check(hm_result_write_metrics_csv(result.get(), csv.c_str()), "writing " + csv.string());

  hm_summary summary{};
  check(hm_result_summary(result.get(), &summary), "summary");
  print_summary("deform", summary);
  std::printf("wrote %s %s %s\n", obj.c_str(), ply.c_str(), csv.c_str());
  return 0;
}

std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      std::fprintf(stderr, "harmonica: --betas: '%s' is not a number\n", item.c_str());
      throw Exit{kExitUsage};
    }
  }
  return out;
}

int cmd_sweep(const Options& opt) {
  std::vector<double> betas;
  if (opt.betas.empty()) {
    betas.resize(hm_default_betas(nullptr, 0));
    hm_default_betas(betas.data(), betas.size());
  } else {
    betas = parse_betas(opt.betas);
  }
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] >= 0.0 && betas[i] < 1.0) || (i > 0 && !(betas[i] > betas[i - 1]))) {
      std::fprintf(stderr, "harmonica: --betas must be strictly increasing values in [0, 1)\n");
      return kExitUsage;
    }
  }
  if (betas.empty()) {
    std::fprintf(stderr, "harmonica: --betas is empty\n");
    return kExitUsage;
  }

  auto sc = open_scenario(opt);
  maybe_dump_resolved(opt, sc.get());
  hm_sweep* raw = nullptr;
  check(hm_sweep_run(sc.get(), betas.data(), betas.size(), hm_thread_limit(), &raw), "sweeping");
  std::unique_ptr<hm_sweep, SweepDeleter> sweep(raw);

  const auto csv = output_path(opt, ".sweep.csv");
  const auto svg = output_path(opt, ".sweep.svg");
  check(hm_sweep_write_csv(sweep.get(), csv.c_str(), opt.no_timings ? 0 : 1), "writing " + csv.string());
  check(hm_sweep_write_svg(sweep.get(), svg.c_str()), "writing " + svg.string());

  std::printf("%10s %14s %14s %14s %14s\n", "beta", "max_iso", "max_conf", "e_p", "e_r");
  for (std::size_t i = 0; i < hm_sweep_row_count(sweep.get()); ++i) {
    hm_sweep_row row{};
    check(hm_sweep_get_row(sweep.get(), i, &row), "reading sweep");
    std::printf("%10g %14.6g %14.6g %14.6g %14.6g\n", row.beta, row.max_iso, row.max_conf, row.e_p, row.e_r);
  }
  std::printf("wrote %s %s\n", csv.c_str(), svg.c_str());
  return 0;
}

int cmd_compare(const Options& opt) {
  auto sc = open_scenario(opt);
  maybe_dump_resolved(opt, sc.get());
  if (hm_scenario_beta(sc.get()) == 0.0)
    std::fprintf(stderr, "harmonica: warning: beta = 0 makes both operators identical; the comparison is vacuous\n");

  hm_comparison* raw = nullptr;
  check(hm_compare(sc.get(), &raw), "comparing operators");
  std::unique_ptr<hm_comparison, ComparisonDeleter> cmp(raw);

  const auto flat = output_path(opt, ".flat.obj");
  const auto curved = output_path(opt, ".curved.obj");
  const auto csv = output_path(opt, ".compare.csv");
  check(hm_result_write_obj(hm_comparison_result(cmp.get(), HM_OPERATOR_FLAT), flat.c_str()), "writing " + flat.string());
  check(hm_result_write_obj(hm_comparison_result(cmp.get(), HM_OPERATOR_CURVED), curved.c_str()),
        "writing " + curved.string());
  check(hm_comparison_write_csv(cmp.get(), csv.c_str()), "writing " + csv.string());

  hm_summary flat_summary{}, curved_summary{};
  check(hm_result_summary(hm_comparison_result(cmp.get(), HM_OPERATOR_FLAT), &flat_summary), "summary");
  check(hm_result_summary(hm_comparison_result(cmp.get(), HM_OPERATOR_CURVED), &curved_summary), "summary");
  print_summary("flat  ", flat_summary);
  print_summary("curved", curved_summary);
  const double diff = hm_comparison_max_difference(cmp.get());
  std::printf("max vertex difference: %.9g (%.3g x bbox diagonal)\n", diff, diff / curved_summary.bbox_diagonal);
  std::printf("wrote %s %s %s\n", flat.c_str(), curved.c_str(), csv.c_str());
  return 0;
}

int cmd_fixtures(const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::pair<const char*, const char*> fixtures[] = {
      {"tetrahedron", R"({"fixture":"tetrahedron"})"},
      {"planar_grid", R"({"fixture":"planar_grid","cells":20})"},
      {"cylinder", R"({"fixture":"cylinder","radius":1,"height":4,"segments":32,"rings":30,"capped":true})"},
      {"folded_strip", R"({"fixture":"folded_strip","folds":6,"panel_length":1,"fold_degrees":45,"panel_segments":4,"width":1,"width_segments":4})"},
      {"bar", R"({"fixture":"bar","sx":1,"sy":1,"sz":4,"cells_per_unit":4})"},
  };
  for (const auto& [name, params] : fixtures) {
    hm_mesh* raw = nullptr;
    check(hm_fixture_create(params, &raw), std::string("generating ") + name);
    std::unique_ptr<hm_mesh, MeshDeleter> mesh(raw);
    const auto path = fs::path(out_dir) / (std::string(name) + ".obj");
    check(hm_mesh_write_obj(mesh.get(), path.c_str()), "writing " + path.string());
    std::printf("%s: %zu vertices, %zu triangles -> %s\n", name, hm_mesh_vertex_count(mesh.get()),
                hm_mesh_triangle_count(mesh.get()), path.c_str());
  }
  return 0;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
  cmd->add_option("--out-dir", opt.out_dir, "Output directory");
  cmd->add_option("--operator", opt.op, "Energy differential operator")->check(CLI::IsMember({"flat", "curved"}));
  cmd->add_flag("--dump-resolved", opt.dump_resolved, "Write the scenario with explicit handle vertex lists");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harmonica: harmonic gradient-domain deformation with energy regularization"};
  app.require_subcommand(1);
  Options opt;
  double beta = 0.0;

  auto* deform = app.add_subcommand("deform", "Deform a mesh from a scenario");
  add_common(deform, opt);
  deform->add_option("--beta", beta, "Regularization weight in [0, 1)");
  deform->add_flag("--dump-operators", opt.dump_operators, "Write operators as MatrixMarket files to --out-dir");

  auto* sweep = app.add_subcommand("sweep", "Evaluate max isometric/conformal errors over beta");
  add_common(sweep, opt);
  sweep->add_option("--betas", opt.betas, "Comma-separated, strictly increasing betas");
  sweep->add_flag("--no-timings", opt.no_timings, "Write timing columns as 0 for byte-stable CSV");

  auto* compare = app.add_subcommand("compare", "Compare flat D against curvature-aware D^R");
  add_common(compare, opt);
  compare->add_option("--beta", beta, "Regularization weight in [0, 1)");

  std::string fixture_dir = "fixtures";
  auto* fixtures = app.add_subcommand("fixtures", "Write the bundled procedural meshes as OBJ");
  fixtures->add_option("--out-dir", fixture_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  for (auto* cmd : {deform, compare})
    if (cmd->parsed() && cmd->count("--beta") > 0) opt.beta = beta;

  try {
    if (deform->parsed()) return cmd_deform(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (fixtures->parsed()) return cmd_fixtures(fixture_dir);
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "harmonica: %s\n", e.what());
    return kExitError;
  }
  return kExitUsage;
}
