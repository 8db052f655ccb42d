#include "harmonica/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "harmonica/error.hpp"

namespace harmonica {

TriangleField local_energy(const SparseOperator& gradient, const Positions& positions,
                           const Eigen::Matrix<double, Eigen::Dynamic, 3>& guidance) {
  if (gradient.cols() != positions.rows() || gradient.rows() != guidance.rows())
    throw Error(ErrorCode::InvalidArgument, "local energy operands have mismatched dimensions");
  const Eigen::Matrix<double, Eigen::Dynamic, 3> residual = gradient.matrix() * positions - guidance;
  TriangleField out(static_cast<std::size_t>(residual.rows() / 3));
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = residual.middleRows<3>(3 * static_cast<Eigen::Index>(t)).squaredNorm();
  return out;
}

namespace {

// Orthonormal 3x2 frame whose first axis follows `first` and whose span
// contains `second`; falls back to arbitrary completions when either vanishes.
Eigen::Matrix<double, 3, 2> plane_frame(const Vec3& first, const Vec3& second) {
  Vec3 f1 = first;
  if (f1.norm() > 0.0) {
    f1.normalize();
  } else if (second.norm() > 0.0) {
    f1 = second.normalized();
  } else {
    f1 = Vec3::UnitX();
  }
  Vec3 f2 = second - second.dot(f1) * f1;
  if (f2.norm() > 1e-300) {
    f2.normalize();
  } else {
    f2 = f1.unitOrthogonal();
  }
  Eigen::Matrix<double, 3, 2> frame;
  frame << f1, f2;
  return frame;
}

}  // namespace

DeformationGradient deformation_gradient_2x2(const Triangle& tri, const Positions& rest, const Positions& deformed) {
  const Vec3 a = (rest.row(tri[1]) - rest.row(tri[0])).transpose();
  const Vec3 b = (rest.row(tri[2]) - rest.row(tri[0])).transpose();
  const Vec3 da = (deformed.row(tri[1]) - deformed.row(tri[0])).transpose();
  const Vec3 db = (deformed.row(tri[2]) - deformed.row(tri[0])).transpose();

  Eigen::Matrix<double, 3, 2> rest_edges, deformed_edges;
  rest_edges << a, b;
  deformed_edges << da, db;
  const Eigen::Matrix2d rest_local = plane_frame(a, b).transpose() * rest_edges;
  const Eigen::Matrix2d deformed_local = plane_frame(da, db).transpose() * deformed_edges;

  DeformationGradient out;
  out.jacobian = deformed_local * rest_local.inverse();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(out.jacobian);
  out.sigma_max = svd.singularValues()[0];
  out.sigma_min = svd.singularValues()[1];
  return out;
}

double isometric_error(double sigma_max, double sigma_min) {
  return (sigma_max - 1.0) * (sigma_max - 1.0) + (sigma_min - 1.0) * (sigma_min - 1.0);
}

double conformal_error(double sigma_max, double sigma_min) {
  return 0.5 * (sigma_max - sigma_min) * (sigma_max - sigma_min);
}

DistortionErrors iso_conf_errors(const std::vector<std::array<double, 2>>& singular_values) {
  DistortionErrors out;
  out.isometric.reserve(singular_values.size());
  out.conformal.reserve(singular_values.size());
  for (const auto& s : singular_values) {
    out.isometric.push_back(isometric_error(s[0], s[1]));
    out.conformal.push_back(conformal_error(s[0], s[1]));
    out.max_isometric = std::max(out.max_isometric, out.isometric.back());
    out.max_conformal = std::max(out.max_conformal, out.conformal.back());
  }
  return out;
}

DistortionErrors distortion(const Mesh& rest, const Positions& deformed) {
  std::vector<std::array<double, 2>> sigmas;
  sigmas.reserve(rest.triangle_count());
  for (const auto& tri : rest.triangles()) {
    const auto dg = deformation_gradient_2x2(tri, rest.vertices(), deformed);
    sigmas.push_back({dg.sigma_max, dg.sigma_min});
  }
  return iso_conf_errors(sigmas);
}

double percentile95(const TriangleField& field) {
  if (field.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty field");
  TriangleField sorted = field;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank = (95 * sorted.size() + 99) / 100;  // ceil(0.95 n), 1-based
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<double> colormap_parameters(const TriangleField& field, double* clip_value) {
  const double clip = percentile95(field);
  if (clip_value) *clip_value = clip;
  std::vector<double> out;
  out.reserve(field.size());
  for (double v : field) {
    if (clip > 0.0)
      out.push_back(std::clamp(v / clip, 0.0, 1.0));
    else
      out.push_back(v > 0.0 ? 1.0 : 0.0);
  }
  return out;
}

Rgb ramp_color(double parameter) {
  // blue -> cyan -> green -> yellow -> red
  static constexpr double stops[5][3] = {{0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}};
  const double s = std::clamp(parameter, 0.0, 1.0) * 4.0;
  const int i = std::min(static_cast<int>(s), 3);
  const double f = s - i;
  Rgb c{};
  for (int k = 0; k < 3; ++k)
    c[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  return c;
}

std::vector<Rgb> colormap(const TriangleField& field, double* clip_value) {
  std::vector<Rgb> out;
  for (double p : colormap_parameters(field, clip_value)) out.push_back(ramp_color(p));
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, bool include_timings) {
  out << "beta,max_iso,max_conf,e_p,e_r,e_total,factorize_ms,solve_ms\n";
  for (const auto& r : sweep.rows) {
    out << fmt(r.beta) << ',' << fmt(r.max_iso) << ',' << fmt(r.max_conf) << ',' << fmt(r.e_p) << ',' << fmt(r.e_r)
        << ',' << fmt(r.e_total) << ',' << fmt(include_timings ? r.factorize_ms : 0.0) << ','
        << fmt(include_timings ? r.solve_ms : 0.0) << '\n';
  }
}

void write_sweep_svg(std::ostream& out, const SweepResult& sweep) {
  constexpr double width = 640, height = 400, left = 70, right = 20, top = 30, bottom = 50;
  constexpr double floor_value = 1e-12;

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, beta_max = 0.0;
  for (const auto& r : sweep.rows) {
    for (double v : {r.max_iso, r.max_conf}) {
      if (v > floor_value) lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    beta_max = std::max(beta_max, r.beta);
  }
  if (!std::isfinite(lo)) lo = floor_value;
  hi = std::max(hi, lo);
  const double dec_lo = std::floor(std::log10(lo));
  const double dec_hi = std::max(std::ceil(std::log10(hi)), dec_lo + 1);
  if (beta_max <= 0.0) beta_max = 1.0;

  const auto px = [&](double beta) { return left + (width - left - right) * beta / beta_max; };
  const auto py = [&](double v) {
    const double l = std::log10(std::max(v, std::pow(10.0, dec_lo)));
    return top + (height - top - bottom) * (dec_hi - l) / (dec_hi - dec_lo);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double d = dec_lo; d <= dec_hi; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    out << "<line x1=\"" << left << "\" x2=\"" << width - right << "\" y1=\"" << fixed(y) << "\" y2=\"" << fixed(y)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">1e" << static_cast<int>(d)
        << "</text>\n";
  }
  for (const auto& r : sweep.rows) {
    out << "<text x=\"" << fixed(px(r.beta)) << "\" y=\"" << height - bottom + 16
        << "\" text-anchor=\"middle\" font-size=\"9\">" << r.beta << "</text>\n";
  }
  out << "<line x1=\"" << left << "\" x2=\"" << width - right << "\" y1=\"" << height - bottom << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" x2=\"" << left << "\" y1=\"" << top << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">beta</text>\n";

  const auto series = [&](auto getter, const char* color, const char* label, double legend_y) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : sweep.rows) out << fixed(px(r.beta)) << ',' << fixed(py(getter(r))) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << width - right - 110 << "\" y=\"" << legend_y << "\" fill=\"" << color << "\">" << label
        << "</text>\n";
  };
  series([](const SweepRow& r) { return r.max_iso; }, "#c0392b", "max isometric", top + 14);
  series([](const SweepRow& r) { return r.max_conf; }, "#2e86c1", "max conformal", top + 30);
  out << "</svg>\n";
}

}  // namespace harmonica
