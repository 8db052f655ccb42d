#include "harmonica/fixtures.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "harmonica/error.hpp"

namespace harmonica::fixtures {
namespace {

Positions to_positions(const std::vector<Vec3>& pts) {
  Positions p(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) p.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return p;
}

// Quad (a, b, c, d) in counter-clockwise order, split along a-c.
void add_quad(std::vector<Triangle>& tris, int a, int b, int c, int d) {
  tris.push_back({a, b, c});
  tris.push_back({a, c, d});
}

}  // namespace

Mesh tetrahedron(double side) {
  const double s = side / std::sqrt(8.0);
  std::vector<Vec3> pts = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  std::vector<Triangle> tris = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return Mesh(to_positions(pts), std::move(tris));
}

Mesh planar_grid(int cells, double size) {
  if (cells < 1) throw Error(ErrorCode::InvalidArgument, "grid needs at least one cell");
  std::vector<Vec3> pts;
  const int n = cells + 1;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pts.emplace_back(size * i / cells, size * j / cells, 0.0);
  std::vector<Triangle> tris;
  for (int j = 0; j < cells; ++j)
    for (int i = 0; i < cells; ++i) add_quad(tris, j * n + i, j * n + i + 1, (j + 1) * n + i + 1, (j + 1) * n + i);
  return Mesh(to_positions(pts), std::move(tris));
}

Mesh cylinder(double radius, double height, int segments, int rings, bool capped) {
  if (segments < 3 || rings < 2) throw Error(ErrorCode::InvalidArgument, "cylinder needs >= 3 segments and >= 2 rings");
  std::vector<Vec3> pts;
  for (int r = 0; r < rings; ++r) {
    const double z = height * r / (rings - 1);
    for (int s = 0; s < segments; ++s) {
      const double a = 2.0 * M_PI * s / segments;
      pts.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  const auto idx = [segments](int r, int s) { return r * segments + (s % segments); };
  std::vector<Triangle> tris;
  for (int r = 0; r + 1 < rings; ++r)
    for (int s = 0; s < segments; ++s) add_quad(tris, idx(r, s), idx(r, s + 1), idx(r + 1, s + 1), idx(r + 1, s));
  if (capped) {
    const int bottom = static_cast<int>(pts.size());
    pts.emplace_back(0.0, 0.0, 0.0);
    const int top = static_cast<int>(pts.size());
    pts.emplace_back(0.0, 0.0, height);
    for (int s = 0; s < segments; ++s) {
      tris.push_back({bottom, idx(0, s + 1), idx(0, s)});
      tris.push_back({top, idx(rings - 1, s), idx(rings - 1, s + 1)});
    }
  }
  return Mesh(to_positions(pts), std::move(tris));
}

Mesh folded_strip(int folds, double panel_length, double fold_degrees, int panel_segments, double width,
                  int width_segments) {
  if (folds < 1 || panel_segments < 1 || width_segments < 1)
    throw Error(ErrorCode::InvalidArgument, "folded strip needs positive counts");
  const double angle = fold_degrees * M_PI / 180.0;
  const double dx = panel_length * std::cos(angle) / panel_segments;
  const double dz = panel_length * std::sin(angle) / panel_segments;

  // Profile of the strip in the x-z plane.
  std::vector<std::pair<double, double>> profile = {{0.0, 0.0}};
  for (int f = 0; f < folds; ++f) {
    const double sign = (f % 2 == 0) ? 1.0 : -1.0;
    for (int k = 0; k < panel_segments; ++k) {
      const auto [x, z] = profile.back();
      profile.emplace_back(x + dx, z + sign * dz);
    }
  }
  const int cols = static_cast<int>(profile.size());
  std::vector<Vec3> pts;
  for (int j = 0; j <= width_segments; ++j)
    for (const auto& [x, z] : profile) pts.emplace_back(x, width * j / width_segments, z);
  std::vector<Triangle> tris;
  for (int j = 0; j < width_segments; ++j)
    for (int i = 0; i + 1 < cols; ++i) add_quad(tris, j * cols + i, j * cols + i + 1, (j + 1) * cols + i + 1, (j + 1) * cols + i);
  return Mesh(to_positions(pts), std::move(tris));
}

Mesh bar(double sx, double sy, double sz, int cells_per_unit) {
  if (cells_per_unit < 1) throw Error(ErrorCode::InvalidArgument, "bar needs at least one cell per unit");
  const int nx = std::max(1, static_cast<int>(std::lround(sx * cells_per_unit)));
  const int ny = std::max(1, static_cast<int>(std::lround(sy * cells_per_unit)));
  const int nz = std::max(1, static_cast<int>(std::lround(sz * cells_per_unit)));
  const std::array<int, 3> n{nx, ny, nz};
  const Vec3 extent(sx, sy, sz);

  std::map<std::tuple<int, int, int>, int> lattice;
  std::vector<Vec3> pts;
  const auto vertex = [&](std::array<int, 3> c) {
    auto [it, inserted] = lattice.try_emplace({c[0], c[1], c[2]}, static_cast<int>(pts.size()));
    if (inserted) pts.emplace_back(extent.x() * c[0] / nx, extent.y() * c[1] / ny, extent.z() * c[2] / nz);
    return it->second;
  };

  std::vector<Triangle> tris;
  // One face per (axis, side); u, v span the face so that u x v points outward.
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      int u = (axis + 1) % 3, v = (axis + 2) % 3;
      if (side == 0) std::swap(u, v);
      for (int a = 0; a < n[static_cast<std::size_t>(u)]; ++a) {
        for (int b = 0; b < n[static_cast<std::size_t>(v)]; ++b) {
          const auto corner = [&](int da, int db) {
            std::array<int, 3> c{};
            c[static_cast<std::size_t>(axis)] = side == 0 ? 0 : n[static_cast<std::size_t>(axis)];
            c[static_cast<std::size_t>(u)] = a + da;
            c[static_cast<std::size_t>(v)] = b + db;
            return vertex(c);
          };
          add_quad(tris, corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1));
        }
      }
    }
  }
  return Mesh(to_positions(pts), std::move(tris));
}

}  // namespace harmonica::fixtures
