#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "harmonica/error.hpp"
#include "harmonica/fixtures.hpp"
#include "harmonica/operators.hpp"

using namespace harmonica;

namespace {

Mesh unit_triangle() {
  return Mesh((Positions(3, 3) << 0, 0, 0, 1, 0, 0, 0, 1, 0).finished(), {{0, 1, 2}});
}

// Two triangles folded 90 degrees along the x axis: left in z = 0, right in y = 0.
Mesh right_angle_fold() {
  return Mesh((Positions(4, 3) << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1).finished(), {{0, 1, 2}, {1, 0, 3}});
}

// Hat-function gradients from the edge formula grad phi_i = n x e_i / (2 A),
// with e_i the edge opposite vertex i traversed counter-clockwise.
Mat3 edge_formula_gradient(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 cross = (b - a).cross(c - a);
  const double twice_area = cross.norm();
  const Vec3 n = cross / twice_area;
  Mat3 g;
  g.col(0) = n.cross(c - b) / twice_area;
  g.col(1) = n.cross(a - c) / twice_area;
  g.col(2) = n.cross(b - a) / twice_area;
  return g;
}

// Cotangent Laplacian, -1/2 (cot alpha + cot beta) off the diagonal.
Eigen::MatrixXd cotan_laplacian(const Mesh& m) {
  const auto n = static_cast<Eigen::Index>(m.vertex_count());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const Triangle& tri : m.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const int o = tri[k], i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      const Vec3 u = m.vertex(i) - m.vertex(o), v = m.vertex(j) - m.vertex(o);
      const double cot = u.dot(v) / u.cross(v).norm();
      l(i, j) -= 0.5 * cot;
      l(j, i) -= 0.5 * cot;
      l(i, i) += 0.5 * cot;
      l(j, j) += 0.5 * cot;
    }
  }
  return l;
}

Mesh fan_disk(int spokes) {
  Positions v(spokes + 1, 3);
  v.row(0) = Vec3::Zero().transpose();
  std::vector<Triangle> tris;
  for (int k = 0; k < spokes; ++k) {
    const double a = 2.0 * M_PI * k / spokes;
    v.row(k + 1) << std::cos(a), std::sin(a), 0.0;
    tris.push_back({0, k + 1, (k + 1) % spokes + 1});
  }
  return Mesh(v, tris);
}

Eigen::MatrixXd dense(const SparseOperator& op) { return Eigen::MatrixXd(op.matrix()); }

Eigen::AngleAxisd angle_axis(double angle, const Vec3& axis) { return Eigen::AngleAxisd(angle, axis.normalized()); }

}  // namespace

TEST_CASE("local gradient on the unit right triangle") {
  const Mesh m = unit_triangle();
  const Mat3 g = local_gradient(m, 0);
  CHECK((g * Vec3(0, 1, 0) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((g * Vec3(0, 0, 1) - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((g * Vec3(4.5, 4.5, 4.5)).norm() < 1e-14);
}

TEST_CASE("local gradient matches the edge formula on random triangles") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Positions v(3, 3);
    for (int i = 0; i < 9; ++i) v(i / 3, i % 3) = u(rng);
    const Mesh m(v, {{0, 1, 2}});
    const Mat3 expected = edge_formula_gradient(m.vertex(0), m.vertex(1), m.vertex(2));
    CHECK((local_gradient(m, 0) - expected).norm() < 1e-9 * expected.norm());
  }
}

TEST_CASE("gradient operator annihilates constants and is tangent") {
  const Mesh m = fixtures::cylinder(1.0, 2.0, 12, 6, true);
  const SparseOperator g = assemble_gradient(m);
  CHECK(g.rows() == static_cast<Eigen::Index>(3 * m.triangle_count()));
  CHECK(g.cols() == static_cast<Eigen::Index>(m.vertex_count()));
  CHECK((g.matrix() * Eigen::VectorXd::Ones(g.cols())).norm() < 1e-10);

  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  Positions x(static_cast<Eigen::Index>(m.vertex_count()), 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  const Eigen::Matrix<double, Eigen::Dynamic, 3> gx = g.matrix() * x;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const Mat3 block = gx.middleRows<3>(3 * static_cast<Eigen::Index>(t));
    const double h = std::sqrt(m.area(t));
    CHECK((m.normal(t).transpose() * block).norm() < 1e-9 * block.norm() + 1e-12 / h);
  }
}

TEST_CASE("gradient of rest coordinates on a planar mesh is diag(1,1,0)") {
  const Mesh m = fixtures::planar_grid(5, 2.0);
  const SparseOperator g = assemble_gradient(m);
  const Eigen::Matrix<double, Eigen::Dynamic, 3> gx = g.matrix() * m.vertices();
  const Mat3 expected = Vec3(1, 1, 0).asDiagonal();
  for (std::size_t t = 0; t < m.triangle_count(); ++t)
    CHECK((gx.middleRows<3>(3 * static_cast<Eigen::Index>(t)) - expected).norm() < 1e-12);
  // 3|T| x |V|; the gradient block of all three coordinates holds 9 values.
  const SparseOperator single = assemble_gradient(unit_triangle());
  CHECK(single.rows() == 3);
  CHECK(single.cols() == 3);
  CHECK((single.matrix() * unit_triangle().vertices()).size() == 9);
}

TEST_CASE("mass matrices") {
  const Mesh tri = unit_triangle();
  const Masses one = assemble_masses(tri, build_topology(tri));
  CHECK(dense(one.triangle_areas).isApprox(Eigen::MatrixXd(Vec3::Constant(0.5).asDiagonal())));
  CHECK(one.edge_lengths.rows() == 0);

  const Mesh pair((Positions(4, 3) << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0).finished(), {{0, 1, 2}, {1, 3, 2}});
  const Masses two = assemble_masses(pair, build_topology(pair));
  REQUIRE(two.edge_lengths_scalar.rows() == 1);
  CHECK(dense(two.edge_lengths_scalar)(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(dense(two.edge_lengths).isApprox(Eigen::MatrixXd(Vec3::Constant(std::sqrt(2.0)).asDiagonal())));

  const Mesh tet = fixtures::tetrahedron(1.0);
  const Masses masses = assemble_masses(tet, build_topology(tet));
  const Eigen::VectorXd diag = dense(masses.triangle_areas).diagonal();
  CHECK(diag.size() == 12);
  CHECK((diag.array() - std::sqrt(3.0) / 4.0).abs().maxCoeff() < 1e-14);
  CHECK(masses.edge_lengths.rows() == 18);
}

TEST_CASE("Laplacian matches the cotangent formula") {
  const std::vector<Mesh> meshes = {fan_disk(8), fixtures::planar_grid(4), fixtures::cylinder(1.0, 1.5, 9, 4, true),
                                    fixtures::tetrahedron()};
  for (const Mesh& m : meshes) {
    const SparseOperator g = assemble_gradient(m);
    const Masses masses = assemble_masses(m, build_topology(m));
    const SparseOperator l = assemble_laplacian(g, masses.triangle_areas);
    const Eigen::MatrixXd ld = dense(l);
    const Eigen::MatrixXd oracle = cotan_laplacian(m);
    CHECK(l.symmetric());
    CHECK((ld - ld.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ld - oracle).cwiseAbs().maxCoeff() < 1e-12 * oracle.cwiseAbs().maxCoeff());
    const Eigen::VectorXd row_sums = ld.rowwise().sum();
    CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-10 * ld.cwiseAbs().maxCoeff());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ld).eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("Laplacian of a planar Delaunay disk has non-positive off-diagonals") {
  const Mesh m = fan_disk(10);
  const Eigen::MatrixXd ld =
      dense(assemble_laplacian(assemble_gradient(m), assemble_masses(m, build_topology(m)).triangle_areas));
  for (Eigen::Index i = 0; i < ld.rows(); ++i)
    for (Eigen::Index j = 0; j < ld.cols(); ++j)
      if (i != j) CHECK(ld(i, j) <= 1e-15);
}

TEST_CASE("flat difference operator") {
  const Mesh pair((Positions(4, 3) << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0).finished(), {{0, 1, 2}, {1, 3, 2}});
  const EdgeTopology topo = build_topology(pair);
  const SparseOperator d = assemble_diff_flat(topo, 2, 1);
  CHECK((d.matrix() * Eigen::Vector2d(5, 3))(0) == 2.0);
  CHECK((d.matrix() * Eigen::Vector2d(7, 7)).norm() == 0.0);

  const Mesh tet = fixtures::tetrahedron();
  const SparseOperator d3 = assemble_diff_flat(build_topology(tet), 4, 3);
  CHECK(d3.rows() == 18);
  CHECK(d3.cols() == 12);
  CHECK(d3.nonzeros() == 36);
}

TEST_CASE("edge rotation examples") {
  const Mesh fold = right_angle_fold();
  const EdgeTopology topo = build_topology(fold);
  REQUIRE(topo.internal_edges.size() == 1);
  const InternalEdge& e = topo.internal_edges[0];
  REQUIRE((fold.normal(static_cast<std::size_t>(e.left)) - Vec3(0, 0, 1)).norm() < 1e-15);
  REQUIRE((fold.normal(static_cast<std::size_t>(e.right)) - Vec3(0, 1, 0)).norm() < 1e-15);
  const Mat3 r = edge_rotation(fold, topo, 0);
  const Mat3 expected = angle_axis(-M_PI / 2.0, Vec3::UnitX()).toRotationMatrix();
  CHECK((r - expected).norm() < 1e-12);
  CHECK((r * Vec3(0, 0, 1) - Vec3(0, 1, 0)).norm() < 1e-12);

  const Mesh flat((Positions(4, 3) << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0).finished(), {{0, 1, 2}, {1, 3, 2}});
  CHECK(edge_rotation(flat, build_topology(flat), 0) == Mat3::Identity());

  // Fold-back: the right triangle lies on top of the left one with opposite orientation.
  const Mesh back((Positions(4, 3) << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0).finished(), {{0, 1, 2}, {1, 0, 3}});
  const EdgeTopology back_topo = build_topology(back);
  CHECK((edge_rotation(back, back_topo, 0) - Mat3(Vec3(1, -1, -1).asDiagonal())).norm() < 1e-12);

  CHECK_THROWS_AS(edge_rotation(flat, build_topology(flat), 1), Error);
}

TEST_CASE("edge rotations are proper and align normals") {
  const Mesh m = fixtures::folded_strip(4, 1.0, 60.0, 3, 1.0, 2);
  const EdgeTopology topo = build_topology(m);
  for (const auto& e : topo.internal_edges) {
    const Mat3 r = edge_rotation(m, topo, e.id);
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-9);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-9);
    CHECK((r * m.normal(static_cast<std::size_t>(e.left)) - m.normal(static_cast<std::size_t>(e.right))).norm() <
          1e-9);
  }
}

TEST_CASE("curved difference reduces to the flat one on planar meshes") {
  const Mesh m = fixtures::planar_grid(20);
  const EdgeTopology topo = build_topology(m);
  const SparseOperator flat = assemble_diff_flat(topo, m.triangle_count(), 3);
  const SparseOperator curved = assemble_diff_curved(m, topo);
  CHECK(curved.rows() == flat.rows());
  CHECK(curved.cols() == flat.cols());
  CHECK(Eigen::MatrixXd(flat.matrix() - curved.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  const Mesh tet = fixtures::tetrahedron();
  const SparseOperator dt = assemble_diff_curved(tet, build_topology(tet));
  CHECK(dt.rows() == 18);
  CHECK(dt.cols() == 12);
}

TEST_CASE("curved difference ignores tangent-relative residual changes across a fold") {
  const Mesh fold = right_angle_fold();
  const EdgeTopology topo = build_topology(fold);
  const InternalEdge& e = topo.internal_edges[0];
  const Mat3 r = edge_rotation(fold, topo, 0);
  // Residual rows live in the left tangent plane; the right residual is the same field rotated.
  Mat3 left;
  left << 0.3, -1.2, 0.7, 2.0, 0.4, -0.5, 0.0, 0.0, 0.0;
  Eigen::Matrix<double, 6, 3> y;
  y.middleRows<3>(3 * e.left) = left;
  y.middleRows<3>(3 * e.right) = r * left;
  const Eigen::Matrix<double, 3, 3> curved = assemble_diff_curved(fold, topo).matrix() * y;
  const Eigen::Matrix<double, 3, 3> flat = assemble_diff_flat(topo, 2, 3).matrix() * y;
  CHECK(curved.norm() < 1e-10);
  CHECK(flat.norm() > 1.0);
}

TEST_CASE("weighted norm") {
  const Mesh m = fixtures::folded_strip(3, 1.0, 45.0, 2, 1.0, 2);
  const EdgeTopology topo = build_topology(m);
  const OperatorSet ops = assemble_operators(m, topo);
  const WeightedNorm w0 = ops.norm(0.0, OperatorKind::Curved);
  CHECK(Eigen::MatrixXd(w0.matrix.matrix() - ops.masses.triangle_areas.matrix()).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  const auto n = ops.gradient.rows();
  for (OperatorKind kind : {OperatorKind::Flat, OperatorKind::Curved}) {
    for (double beta : {0.0, 0.2, 0.7, 0.95}) {
      const WeightedNorm w = ops.norm(beta, kind);
      const Eigen::MatrixXd wd = dense(w.matrix);
      CHECK(w.matrix.symmetric());
      CHECK((wd - wd.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      Eigen::Matrix<double, Eigen::Dynamic, 3> y(n, 3);
      for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = nd(rng);
      const auto& a = ops.masses.triangle_areas.matrix();
      const auto& b = ops.masses.edge_lengths.matrix();
      const Eigen::Matrix<double, Eigen::Dynamic, 3> dy = ops.diff(kind).matrix() * y;
      const double lhs = (y.transpose() * wd * y).trace();
      const double rhs = (1 - beta) * (y.transpose() * (a * y)).trace() + beta * (dy.transpose() * (b * dy)).trace();
      CHECK(std::abs(lhs - rhs) < 1e-9 * std::abs(rhs));
      Eigen::VectorXd x(n);
      for (Eigen::Index i = 0; i < n; ++i) x(i) = nd(rng);
      CHECK(x.dot(wd * x) >= -1e-10 * x.squaredNorm());
      CHECK(Eigen::LLT<Eigen::MatrixXd>(wd).info() == Eigen::Success);
    }
  }
}

TEST_CASE("weighted norm of a single triangle scales the areas") {
  const Mesh m = unit_triangle();
  const OperatorSet ops = assemble_operators(m, build_topology(m));
  for (double beta : {0.0, 0.2, 0.9}) {
    const Eigen::MatrixXd w = dense(ops.norm(beta, OperatorKind::Curved).matrix);
    CHECK((w - (1 - beta) * dense(ops.masses.triangle_areas)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("beta outside [0, 1) is rejected") {
  for (double beta : {-0.1, 1.0, 1.5, std::nan("")}) {
    try {
      check_beta(beta);
      FAIL("expected InvalidBeta");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidBeta);
    }
  }
  CHECK_NOTHROW(check_beta(0.0));
  CHECK_NOTHROW(check_beta(0.999));
}

TEST_CASE("reduced normal equations are positive definite at beta 0.2") {
  const Mesh m = fixtures::cylinder(1.0, 3.0, 10, 8, false);
  const OperatorSet ops = assemble_operators(m, build_topology(m));
  const SparseMatrix& g = ops.gradient.matrix();
  // Eliminate the first ring (vertices 0..9) as constraints.
  std::vector<Triplet> pick;
  for (int v = 10; v < static_cast<int>(m.vertex_count()); ++v) pick.emplace_back(v, v - 10, 1.0);
  SparseMatrix sel(g.cols(), g.cols() - 10);
  sel.setFromTriplets(pick.begin(), pick.end());
  const SparseMatrix gf = g * sel;
  for (OperatorKind kind : {OperatorKind::Flat, OperatorKind::Curved}) {
    const SparseMatrix k = SparseMatrix(gf.transpose()) * ops.norm(0.2, kind).matrix.matrix() * gf;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(k);
    CHECK(ldlt.info() == Eigen::Success);
    CHECK(ldlt.vectorD().minCoeff() > 0.0);
  }
}

TEST_CASE("sparse operators prune tiny entries") {
  std::vector<Triplet> entries = {{0, 0, 1.0}, {0, 1, 1e-15}, {1, 1, -2.0}, {1, 0, 5e-15}};
  const SparseOperator op = SparseOperator::from_triplets(2, 2, entries);
  CHECK(op.nonzeros() == 2);
  const Mesh m = fixtures::cylinder(1.0, 2.0, 8, 5, true);
  const OperatorSet ops = assemble_operators(m, build_topology(m));
  for (const SparseOperator* o : {&ops.gradient, &ops.laplacian, &ops.diff_curved}) {
    for (const Triplet& t : o->entries()) CHECK(std::abs(t.value()) >= 1e-14);
  }
}
