#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "harmonica/mesh.hpp"
#include "harmonica/operators.hpp"

namespace harmonica {

using TriangleField = std::vector<double>;
using Rgb = std::array<std::uint8_t, 3>;

// ||(G X - Z)_t||_F^2 per triangle.
TriangleField local_energy(const SparseOperator& gradient, const Positions& positions,
                           const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance);

struct DeformationGradient {
  Eigen::Matrix2d jacobian;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

// In-plane 2x2 map between rest and deformed triangle frames. A collapsed
// deformed triangle yields sigma_min = 0.
DeformationGradient deformation_gradient_2x2(const Triangle& tri, const Positions& rest, const Positions& deformed);

struct DistortionErrors {
  TriangleField isometric;
  TriangleField conformal;
  double max_isometric = 0.0;
  double max_conformal = 0.0;
};

double isometric_error(double sigma_max, double sigma_min);
double conformal_error(double sigma_max, double sigma_min);

DistortionErrors iso_conf_errors(const std::vector<std::array<double, 2>>& singular_values);
DistortionErrors distortion(const Mesh& rest, const Positions& deformed);

// Nearest-rank 95th percentile: element ceil(0.95 n) of the ascending values.
double percentile95(const TriangleField& field);

// Ramp parameter in [0, 1]: linear up to the 95th percentile, clamped above.
std::vector<double> colormap_parameters(const TriangleField& field, double* clip_value = nullptr);
Rgb ramp_color(double parameter);
std::vector<Rgb> colormap(const TriangleField& field, double* clip_value = nullptr);

struct SweepRow {
  double beta = 0.0;
  double max_iso = 0.0;
  double max_conf = 0.0;
  double e_p = 0.0;
  double e_r = 0.0;
  double e_total = 0.0;
  double factorize_ms = 0.0;
  double solve_ms = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Header: beta,max_iso,max_conf,e_p,e_r,e_total,factorize_ms,solve_ms.
// With include_timings = false the timing columns are written as 0.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, bool include_timings = true);

// Line chart of max_iso and max_conf over beta with a logarithmic y-axis.
void write_sweep_svg(std::ostream& out, const SweepResult& sweep);

}  // namespace harmonica
