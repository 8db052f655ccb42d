#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "harmonica/mesh.hpp"
#include "harmonica/metrics.hpp"
#include "harmonica/operators.hpp"

namespace harmonica {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

Mesh load_obj(const std::filesystem::path& path);

// Vertices and faces only; coordinates printed with round-trip precision.
void write_obj(std::ostream& out, const Positions& positions, const std::vector<Triangle>& triangles);
void write_obj(const std::filesystem::path& path, const Positions& positions, const std::vector<Triangle>& triangles);
inline void write_obj(std::ostream& out, const Mesh& mesh) { write_obj(out, mesh.vertices(), mesh.triangles()); }

// Binary little-endian PLY with per-vertex uchar RGB. Each triangle gets its
// own three vertices so that per-triangle colors stay flat.
void write_colored_ply(std::ostream& out, const Positions& positions, const std::vector<Triangle>& triangles,
                       std::span<const Rgb> triangle_colors);
void write_colored_ply(const std::filesystem::path& path, const Positions& positions,
                       const std::vector<Triangle>& triangles, std::span<const Rgb> triangle_colors);

// MatrixMarket coordinate format (real general).
void write_matrix_market(std::ostream& out, const SparseOperator& op);
void write_matrix_market(const std::filesystem::path& path, const SparseOperator& op);

}  // namespace harmonica
