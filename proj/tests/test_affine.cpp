#include <cmath>

#include "doctest.h"
#include "magshape/affine.hpp"
#include "test_support.hpp"

using namespace magshape;
using magshape::testing::TwoSubdomainToy;
using magshape::testing::make_two_subdomain_toy;
using magshape::testing::relative_gap;

namespace {

/// One-triangle mesh (0,0)-(1,0)-(0,1) fully covered by one subdomain whose
/// vertices morph linearly from the reference to `target` as p1 runs 0 -> 1.
struct MorphFixture {
  TriMesh mesh;
  RegionMap regions;
  Pattern pattern;
  AffineDecomposition decomposition;
};

MorphFixture make_morph(const Eigen::Matrix<double, 2, 3>& target, Material material) {
  MorphFixture f;
  f.mesh.nodes.resize(3, 2);
  f.mesh.nodes << 0, 0, 1, 0, 0, 1;
  f.mesh.triangles.resize(1, 3);
  f.mesh.triangles << 0, 1, 2;
  f.mesh.triangle_region = {0};
  f.mesh.region_tags = {"bulk"};
  f.mesh.boundary_edges.resize(3, 2);
  f.mesh.boundary_edges << 0, 1, 1, 2, 2, 0;
  f.mesh.boundary_labels = {"outer", "outer", "outer"};
  f.regions.materials["bulk"] = material;

  const Eigen::Matrix<double, 2, 3> ref = f.mesh.nodes.transpose();
  AffineSubdomain sub;
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < 2; ++c) {
      sub.vertices[k][c] = AffineExpr::scaled_param(0, target(c, k) - ref(c, k), ref(c, k));
    }
  }
  sub.triangles = {0};
  f.pattern = build_pattern(f.mesh);
  f.decomposition = build_decomposition(f.mesh, f.regions, {sub}, Vector::Zero(1),
                                        1.0, f.pattern);
  return f;
}

ThetaValues theta_fd(const Matrix2& A, const Matrix2& dA, const Vector2& h_m, double h) {
  const ThetaValues hi = theta_values(A + h * dA, h_m);
  const ThetaValues lo = theta_values(A - h * dA, h_m);
  ThetaValues d;
  d.det = (hi.det - lo.det) / (2 * h);
  d.kxx = (hi.kxx - lo.kxx) / (2 * h);
  d.kyy = (hi.kyy - lo.kyy) / (2 * h);
  d.kxy = (hi.kxy - lo.kxy) / (2 * h);
  d.kyx = (hi.kyx - lo.kyx) / (2 * h);
  d.jmx = (hi.jmx - lo.jmx) / (2 * h);
  d.jmy = (hi.jmy - lo.jmy) / (2 * h);
  return d;
}

}  // namespace

TEST_SUITE("affine") {

TEST_CASE("pullback weights of simple maps") {
  const ThetaValues id = theta_values(Matrix2::Identity(), Vector2::Zero());
  CHECK(id.det == 1.0);
  CHECK(id.kxx == 1.0);
  CHECK(id.kyy == 1.0);
  CHECK(id.kxy == 0.0);
  CHECK(id.kyx == 0.0);
  CHECK(id.jmx == 0.0);
  CHECK(id.jmy == 0.0);

  const double s = 1.8;
  const ThetaValues scaled = theta_values(s * Matrix2::Identity(), Vector2::Zero());
  CHECK(scaled.det == doctest::Approx(s * s).epsilon(1e-15));
  CHECK(scaled.kxx == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scaled.kyy == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scaled.kxy == 0.0);

  Matrix2 stretch;
  stretch << 2, 0, 0, 3;
  const ThetaValues aniso = theta_values(stretch, Vector2::Zero());
  CHECK(aniso.det == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(aniso.kxx == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(aniso.kyy == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(aniso.kxy == 0.0);
  CHECK(aniso.kyx == 0.0);
}

TEST_CASE("magnet weights at the identity rotate the magnetization") {
  const Vector2 h_m(3.0, -5.0);
  const ThetaValues t = theta_values(Matrix2::Identity(), h_m);
  CHECK(t.jmx == doctest::Approx(5.0).epsilon(1e-15));   // -h_y
  CHECK(t.jmy == doctest::Approx(3.0).epsilon(1e-15));   // +h_x
}

TEST_CASE("degenerate maps are rejected") {
  Matrix2 collapsed;
  collapsed << 1, 1, 1, 1;
  CHECK_THROWS_AS((void)theta_values(collapsed, Vector2::Zero()), InvalidGeometry);
  Matrix2 flipped = Matrix2::Identity();
  flipped(0, 0) = -1.0;
  CHECK_THROWS_AS((void)theta_values(flipped, Vector2::Zero()), InvalidGeometry);
}

TEST_CASE("weight derivatives match central differences") {
  Matrix2 A;
  A << 1.3, 0.2, -0.4, 0.9;
  const Vector2 h_m(2.0e4, -7.0e3);
  Matrix2 dA;
  SUBCASE("diagonal direction") { dA << 1, 0, 0, 0; }
  SUBCASE("shear direction") { dA << 0, 1, -0.5, 0.25; }

  const ThetaValues d = theta_derivative(A, dA, h_m);
  const ThetaValues fd = theta_fd(A, dA, h_m, 1e-7);
  CHECK(d.det == doctest::Approx(fd.det).epsilon(1e-7));
  CHECK(d.kxx == doctest::Approx(fd.kxx).epsilon(1e-7));
  CHECK(d.kyy == doctest::Approx(fd.kyy).epsilon(1e-7));
  CHECK(d.kxy == doctest::Approx(fd.kxy).epsilon(1e-7));
  CHECK(d.jmx == doctest::Approx(fd.jmx).epsilon(1e-7));
  CHECK(d.jmy == doctest::Approx(fd.jmy).epsilon(1e-7));
}

TEST_CASE("zero direction gives zero weight derivatives") {
  Matrix2 A;
  A << 1.1, 0.3, 0.0, 0.8;
  const ThetaValues d = theta_derivative(A, Matrix2::Zero(), Vector2(1.0, 2.0));
  CHECK(d.det == 0.0);
  CHECK(d.kxx == 0.0);
  CHECK(d.kyy == 0.0);
  CHECK(d.kxy == 0.0);
  CHECK(d.jmx == 0.0);
  CHECK(d.jmy == 0.0);
}

TEST_CASE("subdomain map reproduces a hand-worked vertex morph") {
  Eigen::Matrix<double, 2, 3> target;
  target << 1, 3, 1, 1, 1, 4;  // (1,1), (3,1), (1,4)
  Material m;
  m.sigma = 500.0;
  const MorphFixture f = make_morph(target, m);

  const AffineMap at_ref = subdomain_map(f.decomposition, 0, Vector::Zero(1));
  CHECK((at_ref.A - Matrix2::Identity()).norm() <= 1e-14);
  CHECK(at_ref.shift.norm() <= 1e-14);

  const AffineMap at_one = subdomain_map(f.decomposition, 0, Vector::Ones(1));
  Matrix2 expected;
  expected << 2, 0, 0, 3;
  CHECK((at_one.A - expected).norm() <= 1e-13);
  CHECK((at_one.shift - Vector2(1, 1)).norm() <= 1e-13);
  CHECK(at_one.A.determinant() == doctest::Approx(6.0).epsilon(1e-14));

  // the map derivative is constant in p: compare against divided differences
  const AffineMap dm = subdomain_map_derivative(f.decomposition, 0, 0);
  const double h = 1e-6;
  const AffineMap hi = subdomain_map(f.decomposition, 0, Vector::Constant(1, 0.5 + h));
  const AffineMap lo = subdomain_map(f.decomposition, 0, Vector::Constant(1, 0.5 - h));
  CHECK((dm.A - (hi.A - lo.A) / (2 * h)).norm() <= 1e-8);
  CHECK((dm.shift - (hi.shift - lo.shift) / (2 * h)).norm() <= 1e-8);
}

TEST_CASE("uniformly scaled subdomain scales the mass by its area ratio") {
  Eigen::Matrix<double, 2, 3> target;
  target << 0, 2, 0, 0, 0, 2;  // doubled about the origin
  Material m;
  m.sigma = 500.0;
  m.j_src = 1.0e5;
  const MorphFixture f = make_morph(target, m);

  const AssembledSystem ref = assemble_from_decomposition(f.decomposition, Vector::Zero(1));
  const Vector half = Vector::Constant(1, 0.5);  // scale factor 1.5
  const AssembledSystem moved = assemble_from_decomposition(f.decomposition, half);
  const double s2 = 1.5 * 1.5;
  CHECK(relative_gap(moved.mass, SparseMat(s2 * ref.mass)) <= 1e-14);
  CHECK(relative_gap(moved.load_source, Vector(s2 * ref.load_source)) <= 1e-14);
  // pure scaling leaves the 2D Laplace stiffness unchanged
  CHECK(relative_gap(moved.stiffness, ref.stiffness) <= 1e-14);
}

TEST_CASE("reassembly equals direct assembly on the moved mesh") {
  const TwoSubdomainToy toy = make_two_subdomain_toy(4);
  const auto check_at = [&](const Vector& p, double tol) {
    const AssembledSystem fast = assemble_from_decomposition(toy.decomposition, p);
    const Matrix moved = affine_deformed_nodes(toy.mesh, toy.decomposition, p);
    const AssembledSystem direct = assemble_system(toy.mesh, moved, toy.regions, toy.length,
                                                   toy.pattern);
    CHECK(relative_gap(fast.stiffness, direct.stiffness) <= tol);
    CHECK(relative_gap(fast.mass, direct.mass) <= tol);
    CHECK(relative_gap(fast.load_source, direct.load_source) <= tol);
    CHECK(relative_gap(fast.load_magnet, direct.load_magnet) <= tol);
  };
  check_at(toy.reference, 1e-14);
  check_at((Vector(2) << 0.8, 1.2).finished(), 1e-12);
  check_at((Vector(2) << 1.25, 0.75).finished(), 1e-12);
}

TEST_CASE("assembled stiffness is exactly symmetric") {
  const TwoSubdomainToy toy = make_two_subdomain_toy(3);
  const Vector p = (Vector(2) << 1.2, 0.85).finished();
  const AssembledSystem sys = assemble_from_decomposition(toy.decomposition, p);
  CHECK((sys.stiffness - SparseMat(sys.stiffness.transpose())).norm() == 0.0);
}

TEST_CASE("collapsing the seam reports invalid geometry") {
  const TwoSubdomainToy toy = make_two_subdomain_toy(2);
  CHECK_THROWS_AS((void)assemble_from_decomposition(toy.decomposition,
                                                     (Vector(2) << 0.0, 1.0).finished()),
                  InvalidGeometry);
}

TEST_CASE("system derivative matches central differences of the reassembly") {
  const TwoSubdomainToy toy = make_two_subdomain_toy(3);
  const Vector p = (Vector(2) << 1.1, 0.9).finished();
  const double h = 1e-6;
  for (int param = 0; param < 2; ++param) {
    const AssembledSystem d = decomposition_derivative(toy.decomposition, p, param);
    Vector hi_p = p, lo_p = p;
    hi_p[param] += h;
    lo_p[param] -= h;
    const AssembledSystem hi = assemble_from_decomposition(toy.decomposition, hi_p);
    const AssembledSystem lo = assemble_from_decomposition(toy.decomposition, lo_p);
    const SparseMat fd_k = (hi.stiffness - lo.stiffness) / (2 * h);
    const Vector fd_rhs = (hi.rhs() - lo.rhs()) / (2 * h);
    CHECK((d.stiffness - fd_k).norm() <= 1e-6 * (fd_k.norm() + 1.0));
    CHECK((d.rhs() - fd_rhs).norm() <= 1e-6 * (fd_rhs.norm() + 1.0));
  }
}

TEST_CASE("node velocities match divided differences of the deformation") {
  const TwoSubdomainToy toy = make_two_subdomain_toy(3);
  const double h = 1e-6;
  for (int param = 0; param < 2; ++param) {
    const Matrix vel = affine_node_velocities(toy.mesh, toy.decomposition, param);
    Vector hi_p = toy.reference, lo_p = toy.reference;
    hi_p[param] += h;
    lo_p[param] -= h;
    const Matrix fd = (affine_deformed_nodes(toy.mesh, toy.decomposition, hi_p) -
                       affine_deformed_nodes(toy.mesh, toy.decomposition, lo_p)) /
                      (2 * h);
    CHECK((vel - fd).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("deformation is the identity at the reference design") {
  const TwoSubdomainToy toy = make_two_subdomain_toy(3);
  const Matrix moved = affine_deformed_nodes(toy.mesh, toy.decomposition, toy.reference);
  CHECK((moved - toy.mesh.nodes).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("overlapping subdomains are rejected") {
  TwoSubdomainToy toy = make_two_subdomain_toy(2);
  std::vector<AffineSubdomain> overlapping = toy.subdomains;
  overlapping[1].triangles.push_back(overlapping[0].triangles.front());
  CHECK_THROWS_AS((void)build_decomposition(toy.mesh, toy.regions, overlapping, toy.reference,
                                            toy.length, toy.pattern),
                  std::invalid_argument);
}

TEST_CASE("subdomains mixing magnetizations are rejected") {
  TwoSubdomainToy toy = make_two_subdomain_toy(2);
  std::vector<AffineSubdomain> mixed(1);
  mixed[0].vertices = toy.subdomains[0].vertices;
  for (const auto& sub : toy.subdomains) {
    for (int t : sub.triangles) mixed[0].triangles.push_back(t);
  }
  // one subdomain spanning magnet and coil triangles: magnetization not uniform
  CHECK_THROWS_AS((void)build_decomposition(toy.mesh, toy.regions, mixed, toy.reference,
                                            toy.length, toy.pattern),
                  std::invalid_argument);
}

}  // TEST_SUITE
