#include <doctest.h>

#include <cmath>

#include "harmonica/error.hpp"
#include "harmonica/fixtures.hpp"
#include "harmonica/guidance.hpp"
#include "harmonica/operators.hpp"

using namespace harmonica;

namespace {

struct Rest {
  Mesh mesh;
  OperatorSet ops;
  explicit Rest(Mesh m) : mesh(std::move(m)), ops(assemble_operators(mesh, build_topology(mesh))) {}
};

std::vector<int> range(int begin, int end) {
  std::vector<int> out;
  for (int v = begin; v < end; ++v) out.push_back(v);
  return out;
}

Quaternion about(double degrees, const Vec3& axis) {
  return Quaternion(Eigen::AngleAxisd(degrees * M_PI / 180.0, axis.normalized()));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

HarmonicWeights fixed_weights(const Eigen::RowVectorXd& row) {
  HarmonicWeights w;
  w.vertex = row.replicate(3, 1);
  w.triangle = row;
  return w;
}

}  // namespace

TEST_CASE("a single handle gives constant unit weights") {
  const Rest r(fixtures::cylinder(1.0, 2.0, 10, 6, true));
  const HarmonicWeights w = solve_harmonic_weights(r.mesh, r.ops.laplacian, {{0, 1, 2}});
  CHECK(w.vertex.cols() == 1);
  CHECK((w.vertex.array() - 1.0).abs().maxCoeff() < 1e-10);
  CHECK((w.triangle.array() - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("weights are a partition of unity with exact handle values") {
  const Rest r(fixtures::folded_strip(4, 1.0, 45.0, 3, 1.0, 3));
  const int nv = static_cast<int>(r.mesh.vertex_count());
  const std::vector<std::vector<int>> handles = {{0, 1, 2, 3}, {nv - 1, nv - 2}, {20}};
  const HarmonicWeights w = solve_harmonic_weights(r.mesh, r.ops.laplacian, handles);
  CHECK((w.vertex.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-8);
  for (std::size_t k = 0; k < handles.size(); ++k)
    for (std::size_t j = 0; j < handles.size(); ++j)
      for (int v : handles[j]) CHECK(w.vertex(v, static_cast<Eigen::Index>(k)) == (j == k ? 1.0 : 0.0));

  const Eigen::MatrixXd lh = r.ops.laplacian.matrix() * w.vertex;
  const double l_inf = Eigen::MatrixXd(r.ops.laplacian.matrix()).cwiseAbs().rowwise().sum().maxCoeff();
  const VertexPartition part = make_partition(r.mesh.vertex_count(), handles);
  for (int v : part.free()) CHECK(lh.row(v).norm() <= 1e-8 * l_inf);
  for (std::size_t t = 0; t < r.mesh.triangle_count(); ++t) {
    const Triangle& tri = r.mesh.triangle(t);
    const Eigen::RowVectorXd mean = (w.vertex.row(tri[0]) + w.vertex.row(tri[1]) + w.vertex.row(tri[2])) / 3.0;
    CHECK((w.triangle.row(static_cast<Eigen::Index>(t)) - mean).norm() < 1e-15);
  }
}

TEST_CASE("cylinder ring weights follow 1D harmonic interpolation") {
  // An open, regularly triangulated cylinder is intrinsically flat, so the
  // discrete harmonic function between the end rings is linear along the axis.
  const int segments = 12, rings = 9;
  const Rest r(fixtures::cylinder(1.0, 3.0, segments, rings, false));
  const auto bottom = range(0, segments);
  const auto top = range(segments * (rings - 1), segments * rings);
  const HarmonicWeights w = solve_harmonic_weights(r.mesh, r.ops.laplacian, {bottom, top});
  for (int ring = 0; ring < rings; ++ring) {
    const double expected_top = static_cast<double>(ring) / (rings - 1);
    for (int s = 0; s < segments; ++s) {
      const int v = ring * segments + s;
      CHECK(std::abs(w.vertex(v, 1) - expected_top) < 1e-10);
      CHECK(std::abs(w.vertex(v, 0) - (1.0 - expected_top)) < 1e-10);
    }
  }
}

TEST_CASE("unanchored components are reported") {
  const Positions v = (Positions(6, 3) << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 0, 0, 6, 0, 0, 5, 1, 0).finished();
  const Mesh m(v, {{0, 1, 2}, {3, 4, 5}});
  const OperatorSet ops = assemble_operators(m, build_topology(m));
  try {
    solve_harmonic_weights(m, ops.laplacian, {{0}});
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
    CHECK(std::string(e.what()).find("component") != std::string::npos);
  }
}

TEST_CASE("handle validation") {
  auto make = [](std::vector<std::vector<int>> sets) {
    HandleSet hs;
    for (auto& s : sets) hs.handles.push_back({"h", s, {}});
    return hs;
  };
  CHECK(code_of([&] { validate_handles(make({{0}, {}}), 5); }) == ErrorCode::InvalidHandles);
  CHECK(code_of([&] { validate_handles(make({{0, 1}, {1, 2}}), 5); }) == ErrorCode::InvalidHandles);
  CHECK(code_of([&] { validate_handles(make({{0, 7}}), 5); }) == ErrorCode::InvalidHandles);
  CHECK(code_of([&] { validate_handles(make({{0, 1, 2}, {3, 4}}), 5); }) == ErrorCode::InvalidHandles);
  CHECK(code_of([&] { validate_handles(HandleSet{}, 5); }) == ErrorCode::InvalidHandles);
  HandleSet bad = make({{0}});
  bad.handles[0].transform.rotation = Quaternion(1.0, 0.0, 0.0, 1e-4);
  CHECK(code_of([&] { validate_handles(bad, 5); }) == ErrorCode::InvalidArgument);
  bad.handles[0].transform.rotation = Quaternion::Identity();
  bad.handles[0].transform.scale = 0.0;
  CHECK(code_of([&] { validate_handles(bad, 5); }) == ErrorCode::InvalidArgument);
  CHECK_NOTHROW(validate_handles(make({{0, 1}, {4}}), 5));
}

TEST_CASE("blending equal transforms reproduces them") {
  HandleSet hs;
  HandleTransform tf;
  tf.rotation = about(33.0, Vec3(1, 2, 3));
  tf.scale = 1.7;
  hs.handles = {{"a", {0}, tf}, {"b", {1}, tf}, {"c", {2}, tf}};
  const HarmonicWeights w = fixed_weights(Eigen::RowVector3d(0.2, 0.5, 0.3));
  CHECK((blend_transforms(w, hs, 0) - tf.linear()).norm() < 1e-14);
  // Negated quaternions describe the same rotation.
  hs.handles[1].transform.rotation.coeffs() *= -1.0;
  CHECK((blend_transforms(w, hs, 0) - tf.linear()).norm() < 1e-14);
}

TEST_CASE("one-hot weights select a handle") {
  HandleSet hs;
  hs.handles = {{"a", {0}, {about(10, Vec3::UnitX()), Vec3::Zero(), 2.0, {}}},
                {"b", {1}, {about(70, Vec3::UnitY()), Vec3::Zero(), 0.5, {}}}};
  const HarmonicWeights w = fixed_weights(Eigen::RowVector2d(1.0, 0.0));
  CHECK((blend_transforms(w, hs, 0) - hs.handles[0].transform.linear()).norm() < 1e-14);
}

TEST_CASE("midpoint blend of identity and 90 degrees about z is 45 degrees") {
  HandleSet hs;
  hs.handles = {{"a", {0}, {}}, {"b", {1}, {about(90, Vec3::UnitZ()), Vec3::Zero(), 1.0, {}}}};
  const HarmonicWeights w = fixed_weights(Eigen::RowVector2d(0.5, 0.5));
  const Quaternion q = blend_rotation(w, hs, 0);
  // cos(22.5 deg) + sin(22.5 deg) k, up to sign.
  const Eigen::Vector4d expected(0, 0, std::sin(M_PI / 8), std::cos(M_PI / 8));
  CHECK(std::min((q.coeffs() - expected).norm(), (q.coeffs() + expected).norm()) < 1e-14);
  CHECK((blend_transforms(w, hs, 0) - about(45, Vec3::UnitZ()).toRotationMatrix()).norm() < 1e-14);
}

TEST_CASE("blend weights that cancel are rejected") {
  HandleSet hs;
  hs.handles = {{"a", {0}, {}}, {"b", {1}, {}}};
  const HarmonicWeights w = fixed_weights(Eigen::RowVector2d(0.0, 0.0));
  CHECK(code_of([&] { blend_transforms(w, hs, 0); }) == ErrorCode::BlendCancellation);
}

TEST_CASE("guidance for identity, global rotation and scale") {
  const Rest r(fixtures::cylinder(1.0, 2.0, 10, 5, true));
  const int nv = static_cast<int>(r.mesh.vertex_count());
  const std::vector<std::vector<int>> sets = {{nv - 2}, {nv - 1}};
  const HarmonicWeights w = solve_harmonic_weights(r.mesh, r.ops.laplacian, sets);
  const Eigen::Matrix<double, Eigen::Dynamic, 3> gx0 = r.ops.gradient.matrix() * r.mesh.vertices();

  HandleSet hs;
  hs.handles = {{"bottom", sets[0], {}}, {"top", sets[1], {}}};
  CHECK((build_guidance(r.mesh, r.ops.gradient, w, hs).blocks - gx0).norm() < 1e-12);

  const Quaternion q = about(40, Vec3(1, -1, 2));
  for (auto& h : hs.handles) h.transform.rotation = q;
  const Mat3 rot = q.toRotationMatrix();
  const GuidanceField rotated = build_guidance(r.mesh, r.ops.gradient, w, hs);
  CHECK(rotated.triangle_count() == r.mesh.triangle_count());
  for (std::size_t t = 0; t < r.mesh.triangle_count(); ++t) {
    const Mat3 expected = gx0.middleRows<3>(3 * static_cast<Eigen::Index>(t)) * rot.transpose();
    CHECK((Mat3(rotated.block(t)) - expected).norm() < 1e-13);
  }

  for (auto& h : hs.handles) h.transform = {Quaternion::Identity(), Vec3(3, 4, 5), 2.0, {}};
  CHECK((build_guidance(r.mesh, r.ops.gradient, w, hs).blocks - 2.0 * gx0).norm() < 1e-13);
}

TEST_CASE("guidance blocks map the rest tangent plane into the blended one") {
  const Rest r(fixtures::cylinder(1.0, 4.0, 16, 12, true));
  const int nv = static_cast<int>(r.mesh.vertex_count());
  HandleSet hs;
  hs.handles = {{"bottom", {nv - 2}, {}}, {"top", {nv - 1}, {about(90, Vec3::UnitZ()), Vec3::Zero(), 1.3, {}}}};
  const HarmonicWeights w = solve_harmonic_weights(r.mesh, r.ops.laplacian, hs.partition());
  const GuidanceField z = build_guidance(r.mesh, r.ops.gradient, w, hs);
  CHECK(z.blocks.allFinite());
  for (std::size_t t = 0; t < r.mesh.triangle_count(); ++t) {
    const Vec3 n_blended = blend_rotation(w, hs, t) * r.mesh.normal(t);
    // Each row is the image of a rest tangent direction, orthogonal to the rotated normal.
    CHECK((Mat3(z.block(t)) * n_blended).norm() < 1e-8);
  }
}

TEST_CASE("constrained positions") {
  const Rest r(fixtures::planar_grid(3));
  HandleSet hs;
  hs.handles = {{"a", {5, 0}, {}}, {"b", {15}, {Quaternion::Identity(), Vec3(0.5, -1, 2), 1.0, {}}}};
  Constraints c = constrained_positions(r.mesh, hs);
  CHECK(c.vertices == std::vector<int>{0, 5, 15});
  CHECK(c.positions.row(0) == r.mesh.vertices().row(0));
  CHECK(c.positions.row(1) == r.mesh.vertices().row(5));
  CHECK((c.positions.row(2) - r.mesh.vertices().row(15) - Eigen::RowVector3d(0.5, -1, 2)).norm() < 1e-15);

  hs.handles = {{"ring", {0, 1, 4, 5}, {about(90, Vec3::UnitZ()), Vec3::Zero(), 1.0, {}}}};
  c = constrained_positions(r.mesh, hs);
  const Vec3 centroid = handle_pivot(r.mesh, hs.handles[0]);
  CHECK((centroid - (r.mesh.vertex(0) + r.mesh.vertex(1) + r.mesh.vertex(4) + r.mesh.vertex(5)) / 4.0).norm() < 1e-15);
  for (std::size_t i = 0; i < c.vertices.size(); ++i) {
    const Vec3 moved = c.positions.row(static_cast<Eigen::Index>(i)).transpose();
    const Vec3 rest = r.mesh.vertex(c.vertices[i]);
    CHECK(std::abs((moved - centroid).norm() - (rest - centroid).norm()) < 1e-14);
    const Vec3 expected = centroid + Vec3(-(rest - centroid).y(), (rest - centroid).x(), 0.0);
    CHECK((moved - expected).norm() < 1e-14);
  }
}

TEST_CASE("partition bookkeeping") {
  const VertexPartition p = make_partition(6, {{4, 1}, {3}});
  CHECK(p.constrained() == std::vector<int>{1, 3, 4});
  CHECK(p.free() == std::vector<int>{0, 2, 5});
  CHECK(p.free_index(2) == 1);
  CHECK(p.is_constrained(3));
  CHECK(p == make_partition(6, {{3}, {1, 4}}));
  CHECK(p.hash() == make_partition(6, {{3}, {1, 4}}).hash());
  CHECK(p.hash() != make_partition(6, {{3}, {1, 5}}).hash());
}
