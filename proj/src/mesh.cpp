#include "harmonica/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Geometry>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

constexpr double kRelativeAreaEpsilon = 1e-12;

std::string pair_string(int a, int b) {
  return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

double bbox_diagonal_of(const Positions& v) {
  if (v.rows() == 0) return 0.0;
  return (v.colwise().maxCoeff() - v.colwise().minCoeff()).norm();
}

Vec3 area_vector(const Positions& v, const Triangle& tri) {
  const Vec3 a = v.row(tri[0]).transpose();
  const Vec3 b = v.row(tri[1]).transpose();
  const Vec3 c = v.row(tri[2]).transpose();
  return 0.5 * (b - a).cross(c - a);
}

// First triangle that references an invalid vertex, if any.
std::optional<std::size_t> find_out_of_range(std::size_t nv, const std::vector<Triangle>& tris) {
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int i : tris[t])
      if (i < 0 || static_cast<std::size_t>(i) >= nv) return t;
  return std::nullopt;
}

std::optional<std::size_t> find_degenerate(const Positions& v, const std::vector<Triangle>& tris) {
  const double diag = bbox_diagonal_of(v);
  const double eps = kRelativeAreaEpsilon * diag * diag;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) return t;
    if (!(area_vector(v, tri).norm() > eps)) return t;
  }
  return std::nullopt;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

Mesh::Mesh(Positions vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (vertices_.rows() == 0) throw Error(ErrorCode::InvalidArgument, "mesh has no vertices");
  if (!vertices_.allFinite()) throw Error(ErrorCode::MalformedVertex, "non-finite vertex coordinate");
  if (auto t = find_out_of_range(vertex_count(), triangles_))
    throw Error(ErrorCode::IndexOutOfRange, "triangle " + std::to_string(*t) + " references a missing vertex");
  if (auto t = find_degenerate(vertices_, triangles_))
    throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(*t) + " has (near) zero area");

  bbox_min_ = vertices_.colwise().minCoeff().transpose();
  bbox_max_ = vertices_.colwise().maxCoeff().transpose();

  areas_.reserve(triangles_.size());
  normals_.reserve(triangles_.size());
  for (const auto& tri : triangles_) {
    const Vec3 av = area_vector(vertices_, tri);
    const double a = av.norm();
    areas_.push_back(a);
    normals_.push_back(av / a);
  }

  std::vector<int> parent(vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& tri : triangles_) {
    for (int k = 1; k < 3; ++k) {
      const int ra = find_root(parent, tri[0]);
      const int rb = find_root(parent, tri[k]);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  components_.assign(vertex_count(), -1);
  std::vector<int> label(vertex_count(), -1);
  for (std::size_t i = 0; i < vertex_count(); ++i) {
    const int r = find_root(parent, static_cast<int>(i));
    if (label[r] < 0) label[r] = component_count_++;
    components_[i] = label[r];
  }
}

double Mesh::degenerate_area_threshold() const {
  const double d = bbox_diagonal();
  return kRelativeAreaEpsilon * d * d;
}

EdgeTopology build_topology(const Mesh& mesh) {
  struct Incidence {
    int triangle;
    bool ascending;  // traversed low -> high in the triangle's cyclic order
  };
  std::map<std::pair<int, int>, std::vector<Incidence>> edges;
  const auto& tris = mesh.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = tris[t][k];
      const int b = tris[t][(k + 1) % 3];
      auto& inc = edges[{std::min(a, b), std::max(a, b)}];
      inc.push_back({static_cast<int>(t), a < b});
      if (inc.size() > 2)
        throw Error(ErrorCode::NonManifold,
                    "edge " + pair_string(std::min(a, b), std::max(a, b)) + " has more than two incident triangles");
    }
  }

  EdgeTopology topo;
  for (const auto& [key, inc] : edges) {
    const std::array<int, 2> verts{key.first, key.second};
    if (inc.size() == 1) {
      topo.boundary_edges.push_back({inc[0].triangle, verts});
      continue;
    }
    if (inc[0].triangle == inc[1].triangle)
      throw Error(ErrorCode::NonManifold, "edge " + pair_string(key.first, key.second) + " appears twice in one triangle");
    int left = std::min(inc[0].triangle, inc[1].triangle);
    int right = std::max(inc[0].triangle, inc[1].triangle);
    if (inc[0].ascending != inc[1].ascending) {
      left = inc[0].ascending ? inc[0].triangle : inc[1].triangle;
      right = inc[0].ascending ? inc[1].triangle : inc[0].triangle;
    }
    InternalEdge e;
    e.id = static_cast<int>(topo.internal_edges.size());
    e.left = left;
    e.right = right;
    e.vertices = verts;
    e.length = (mesh.vertex(key.first) - mesh.vertex(key.second)).norm();
    topo.internal_edges.push_back(e);
  }
  return topo;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(std::string_view s, long& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Mesh parse_obj(std::string_view text) {
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  std::vector<int> tri_lines;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    auto line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto tokens = split_ws(line);

    if (tokens[0] == "v") {
      Vec3 p;
      if (tokens.size() < 4 || tokens.size() > 5 || !parse_double(tokens[1], p.x()) ||
          !parse_double(tokens[2], p.y()) || !parse_double(tokens[3], p.z()))
        throw Error(ErrorCode::MalformedVertex, "expected 'v x y z'", line_no);
      verts.push_back(p);
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) throw Error(ErrorCode::MalformedFace, "face needs at least three vertices", line_no);
      std::vector<int> poly;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        long idx = 0;
        if (!parse_int(tokens[k].substr(0, tokens[k].find('/')), idx) || idx == 0)
          throw Error(ErrorCode::MalformedFace, "bad face index '" + std::string(tokens[k]) + "'", line_no);
        const long n = static_cast<long>(verts.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;
        if (resolved < 0 || resolved >= n)
          throw Error(ErrorCode::IndexOutOfRange,
                      "face index " + std::to_string(idx) + " out of range (" + std::to_string(n) + " vertices)",
                      line_no);
        poly.push_back(static_cast<int>(resolved));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        tris.push_back({poly[0], poly[k], poly[k + 1]});
        tri_lines.push_back(line_no);
      }
    }
  }

  Positions positions(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) positions.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();

  if (verts.empty()) throw Error(ErrorCode::MalformedVertex, "no vertices");
  if (auto t = find_degenerate(positions, tris))
    throw Error(ErrorCode::DegenerateTriangle, "zero-area triangle", tri_lines[*t]);

  std::map<std::pair<int, int>, int> edge_use;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = tris[t][k];
      const int b = tris[t][(k + 1) % 3];
      if (++edge_use[{std::min(a, b), std::max(a, b)}] > 2)
        throw Error(ErrorCode::NonManifold,
                    "edge " + pair_string(std::min(a, b) + 1, std::max(a, b) + 1) +
                        " (1-based) has more than two incident faces",
                    tri_lines[t]);
    }
  }
  return Mesh(std::move(positions), std::move(tris));
}

}  // namespace harmonica
