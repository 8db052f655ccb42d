#include "harmonica/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  auto out = open_for_write(path, std::ios::binary);
  out << contents;
}

Mesh load_obj(const std::filesystem::path& path) { return parse_obj(read_text_file(path)); }

void write_obj(std::ostream& out, const Positions& positions, const std::vector<Triangle>& triangles) {
  char buf[128];
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", positions(i, 0), positions(i, 1), positions(i, 2));
    out << buf;
  }
  for (const auto& t : triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_obj(const std::filesystem::path& path, const Positions& positions, const std::vector<Triangle>& triangles) {
  auto out = open_for_write(path);
  write_obj(out, positions, triangles);
}

void write_colored_ply(std::ostream& out, const Positions& positions, const std::vector<Triangle>& triangles,
                       std::span<const Rgb> triangle_colors) {
  if (triangle_colors.size() != triangles.size())
    throw Error(ErrorCode::InvalidArgument, "one color per triangle is required");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << 3 * triangles.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "element face " << triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int v : triangles[t]) {
      for (int c = 0; c < 3; ++c) put_le(out, static_cast<float>(positions(v, c)));
      for (auto channel : triangle_colors[t]) put_le(out, channel);
    }
  }
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    put_le(out, static_cast<std::uint8_t>(3));
    for (int k = 0; k < 3; ++k) put_le(out, static_cast<std::int32_t>(3 * t + static_cast<std::size_t>(k)));
  }
}

void write_colored_ply(const std::filesystem::path& path, const Positions& positions,
                       const std::vector<Triangle>& triangles, std::span<const Rgb> triangle_colors) {
  auto out = open_for_write(path, std::ios::binary);
  write_colored_ply(out, positions, triangles, triangle_colors);
}

void write_matrix_market(std::ostream& out, const SparseOperator& op) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << op.rows() << ' ' << op.cols() << ' ' << op.nonzeros() << '\n';
  char buf[96];
  for (const auto& e : op.entries()) {
    std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(e.row() + 1), static_cast<long>(e.col() + 1),
                  e.value());
    out << buf;
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseOperator& op) {
  auto out = open_for_write(path);
  write_matrix_market(out, op);
}

}  // namespace harmonica
