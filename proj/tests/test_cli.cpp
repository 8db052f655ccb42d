#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "harmonica/io.hpp"
#include "harmonica/mesh.hpp"
#include "harmonica/scenario.hpp"

namespace fs = std::filesystem;
using namespace harmonica;

namespace {

const fs::path kData = HARMONICA_DATA_DIR;

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
  const std::string cmd = std::string(HARMONICA_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("harmonica_cli_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string scenario(const char* name) { return (kData / name).string(); }

double field(const std::string& text, const std::string& key, int occurrence = 0) {
  const std::regex re(key + "=([-+0-9.eE]+|nan|inf)");
  auto it = std::sregex_iterator(text.begin(), text.end(), re);
  for (int i = 0; i < occurrence && it != std::sregex_iterator(); ++i) ++it;
  REQUIRE(it != std::sregex_iterator());
  return std::stod((*it)[1]);
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("deform").code == 2);
  CHECK(run("deform --scenario x.json --operator bent").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("identity deform reproduces the input") {
  TempDir tmp("identity");
  const Run r = run("deform --scenario " + scenario("identity.json") + " --out-dir " + tmp.str());
  REQUIRE(r.code == 0);
  CHECK(field(r.out, "E_P") < 1e-12);
  const Mesh out = load_obj(tmp.path / "identity.deformed.obj");
  const Scenario sc = load_scenario(kData / "identity.json");
  CHECK((out.vertices() - sc.model->mesh().vertices()).rowwise().norm().maxCoeff() <
        1e-6 * sc.model->mesh().bbox_diagonal());
  CHECK(fs::exists(tmp.path / "identity.energy.ply"));
  const auto metrics = csv_rows(tmp.path / "identity.metrics.csv");
  CHECK(metrics.size() == sc.model->mesh().triangle_count() + 1);
  CHECK(metrics[0] == std::vector<std::string>{"triangle", "energy", "e_iso", "e_conf", "sigma_max", "sigma_min"});
}

TEST_CASE("regularization lowers max_iso on the bending bar") {
  TempDir tmp("bar");
  const Run r0 = run("deform --scenario " + scenario("bar_bend.json") + " --beta 0 --out-dir " + tmp.str());
  const Run r2 = run("deform --scenario " + scenario("bar_bend.json") + " --beta 0.2 --out-dir " + tmp.str());
  REQUIRE(r0.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(field(r2.out, "max_iso") < field(r0.out, "max_iso"));
  CHECK(field(r0.out, "beta") == 0.0);
  CHECK(field(r2.out, "beta") == 0.2);
}

TEST_CASE("module and scenario errors") {
  TempDir tmp("errors");
  write_text_file(tmp.path / "missing.json",
                  R"({"version": 1, "mesh": "no_such_mesh.obj", "handles": [{"vertices": [0]}]})");
  const Run missing = run("deform --scenario " + (tmp.path / "missing.json").string() + " --out-dir " + tmp.str());
  CHECK(missing.code == 1);
  CHECK(missing.out.find("no_such_mesh.obj") != std::string::npos);

  write_text_file(tmp.path / "broken.json", R"({"version": 1, "mesh": {"fixture": "tetrahedron"}})");
  CHECK(run("deform --scenario " + (tmp.path / "broken.json").string()).code == 2);
  CHECK(run("deform --scenario " + (tmp.path / "nowhere.json").string()).code == 1);
  CHECK(run("deform --scenario " + scenario("cylinder_twist.json") + " --beta 1.5 --out-dir " + tmp.str()).code == 2);
}

TEST_CASE("sweeps") {
  TempDir tmp("sweep");
  const Run full = run("sweep --scenario " + scenario("cylinder_twist.json") + " --out-dir " + tmp.str());
  REQUIRE(full.code == 0);
  const auto rows = csv_rows(tmp.path / "cylinder_twist.sweep.csv");
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == std::vector<std::string>{"beta", "max_iso", "max_conf", "e_p", "e_r", "e_total", "factorize_ms",
                                            "solve_ms"});
  CHECK(std::stod(rows[6][1]) < std::stod(rows[1][1]));
  CHECK(read_text_file(tmp.path / "cylinder_twist.sweep.svg").find("<svg") == 0);

  const Run rigid = run("sweep --scenario " + scenario("rigid.json") + " --betas 0,0.2 --out-dir " + tmp.str());
  REQUIRE(rigid.code == 0);
  const auto rigid_rows = csv_rows(tmp.path / "rigid.sweep.csv");
  REQUIRE(rigid_rows.size() == 3);
  for (std::size_t i = 1; i < rigid_rows.size(); ++i) CHECK(std::stod(rigid_rows[i][1]) < 1e-9);

  CHECK(run("sweep --scenario " + scenario("rigid.json") + " --betas 0.2,0.1 --out-dir " + tmp.str()).code == 2);
  CHECK(run("sweep --scenario " + scenario("rigid.json") + " --betas 0,abc --out-dir " + tmp.str()).code == 2);
  CHECK(run("sweep --scenario " + scenario("rigid.json") + " --betas 0,1 --out-dir " + tmp.str()).code == 2);
}

TEST_CASE("outputs are byte-identical across runs") {
  TempDir a("det_a"), b("det_b");
  for (const TempDir* dir : {&a, &b}) {
    REQUIRE(run("sweep --no-timings --scenario " + scenario("bar_bend.json") + " --betas 0,0.1,0.2 --out-dir " +
                dir->str())
                .code == 0);
    REQUIRE(run("deform --scenario " + scenario("bar_bend.json") + " --out-dir " + dir->str()).code == 0);
    REQUIRE(run("compare --scenario " + scenario("accordion.json") + " --out-dir " + dir->str()).code == 0);
  }
  for (const char* name : {"bar_bend.sweep.csv", "bar_bend.metrics.csv", "bar_bend.deformed.obj",
                           "accordion.compare.csv", "accordion.curved.obj"})
    CHECK(read_text_file(a.path / name) == read_text_file(b.path / name));
}

TEST_CASE("operator comparison") {
  TempDir tmp("compare");
  const Run planar = run("compare --scenario " + scenario("planar_grid.json") + " --out-dir " + tmp.str());
  REQUIRE(planar.code == 0);
  const auto rows = csv_rows(tmp.path / "planar_grid.compare.csv");
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == std::vector<std::string>{"vertex", "dx", "dy", "dz", "distance"});
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, std::stod(rows[i][4]));
  CHECK(worst < 1e-9 * std::sqrt(2.0));

  const Run folded = run("compare --scenario " + scenario("accordion.json") + " --out-dir " + tmp.str());
  REQUIRE(folded.code == 0);
  const double flat_iso = field(folded.out, "max_iso", 0), curved_iso = field(folded.out, "max_iso", 1);
  CHECK(curved_iso <= flat_iso);
  std::smatch m;
  REQUIRE(std::regex_search(folded.out, m, std::regex("max vertex difference: ([-+0-9.eE]+)")));
  CHECK(std::stod(m[1]) > 1e-6);

  const Run vacuous = run("compare --scenario " + scenario("accordion.json") + " --beta 0 --out-dir " + tmp.str());
  CHECK(vacuous.code == 0);
  CHECK(vacuous.out.find("vacuous") != std::string::npos);
}

TEST_CASE("resolved scenarios re-run to identical results") {
  TempDir tmp("resolved");
  REQUIRE(run("deform --dump-resolved --scenario " + scenario("bar_bend.json") + " --out-dir " + tmp.str()).code == 0);
  const fs::path resolved = tmp.path / "bar_bend.resolved.json";
  REQUIRE(fs::exists(resolved));
  fs::create_directories(tmp.path / "again");
  fs::copy_file(resolved, tmp.path / "again" / "bar_bend.json");
  REQUIRE(run("deform --scenario " + (tmp.path / "again" / "bar_bend.json").string() + " --out-dir " +
              (tmp.path / "again").string())
              .code == 0);
  CHECK(read_text_file(tmp.path / "bar_bend.deformed.obj") ==
        read_text_file(tmp.path / "again" / "bar_bend.deformed.obj"));
}

TEST_CASE("operator dumps and fixtures") {
  TempDir tmp("dump");
  REQUIRE(run("deform --dump-operators --scenario " + scenario("accordion.json") + " --out-dir " + tmp.str()).code == 0);
  CHECK(fs::exists(tmp.path / "G.mtx"));
  REQUIRE(run("fixtures --out-dir " + (tmp.path / "fx").string()).code == 0);
  for (const char* name : {"tetrahedron.obj", "planar_grid.obj", "cylinder.obj", "folded_strip.obj", "bar.obj"})
    CHECK_NOTHROW(load_obj(tmp.path / "fx" / name));
}
