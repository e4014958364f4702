#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "magshape/design_element.hpp"
#include "test_support.hpp"

using namespace magshape;
using magshape::testing::grid_mesh;

namespace {

Vector single(double v) { return Vector::Constant(1, v); }

DesignElement unit_square_element() {
  DesignElement e;
  e.name = "square";
  e.curve0 = CurveSpec::fixed_segment(Vector2(0, 0), Vector2(1, 0));
  e.curve1 = CurveSpec::fixed_segment(Vector2(0, 1), Vector2(1, 1));
  return e;
}

/// Bottom edge fixed, top edge at height p1; identity at p1 = 1.
DesignElement stretch_element() {
  DesignElement e;
  e.name = "stretch";
  e.curve0 = CurveSpec::fixed_segment(Vector2(0, 0), Vector2(1, 0));
  e.curve1 = CurveSpec::segment(
      {AffineExpr::constant_value(0.0), AffineExpr::scaled_param(0, 1.0)},
      {AffineExpr::constant_value(1.0), AffineExpr::scaled_param(0, 1.0)});
  return e;
}

}  // namespace

TEST_SUITE("design_element") {

TEST_CASE("ruled patch interpolates its bounding curves") {
  const ElementFrame frame = realize_element(unit_square_element(), Vector(0), 0);
  for (double xh : {0.0, 0.25, 0.8, 1.0}) {
    CHECK((frame.map(xh, 0.0) - Vector2(xh, 0.0)).norm() <= 1e-15);
    CHECK((frame.map(xh, 1.0) - Vector2(xh, 1.0)).norm() <= 1e-15);
  }
  CHECK((frame.map(0.3, 0.7) - Vector2(0.3, 0.7)).norm() <= 1e-15);
  const Matrix2 jac = frame.jacobian(0.5, 0.5);
  CHECK((jac - Matrix2::Identity()).norm() <= 1e-12);
  CHECK(jac.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("local coordinates outside the unit square are rejected") {
  const ElementFrame frame = realize_element(unit_square_element(), Vector(0), 0);
  CHECK_THROWS_AS((void)frame.map(-0.1, 0.5), std::out_of_range);
  CHECK_THROWS_AS((void)frame.map(0.5, 1.1), std::out_of_range);
}

TEST_CASE("jacobian of a uniformly scaled patch") {
  DesignElement e;
  e.name = "scaled";
  e.curve0 = CurveSpec::segment(
      {AffineExpr::constant_value(0.0), AffineExpr::constant_value(0.0)},
      {AffineExpr::scaled_param(0, 1.0), AffineExpr::constant_value(0.0)});
  e.curve1 = CurveSpec::segment(
      {AffineExpr::constant_value(0.0), AffineExpr::scaled_param(0, 1.0)},
      {AffineExpr::scaled_param(0, 1.0), AffineExpr::scaled_param(0, 1.0)});
  const double s = 1.7;
  const ElementFrame frame = realize_element(e, single(s), 1);
  const Matrix2 jac = frame.jacobian(0.4, 0.6);
  CHECK((jac - s * Matrix2::Identity()).norm() <= 1e-12);
  CHECK(jac.determinant() == doctest::Approx(s * s).epsilon(1e-12));

  // parameter derivative of the map against central differences
  const double h = 1e-7;
  const ElementFrame lo = realize_element(e, single(s - h), 1);
  const ElementFrame hi = realize_element(e, single(s + h), 1);
  const Vector2 fd = (hi.map(0.4, 0.6) - lo.map(0.4, 0.6)) / (2 * h);
  CHECK((frame.map_param_derivative(0.4, 0.6, 0) - fd).norm() <= 1e-6);
}

TEST_CASE("newton inversion round-trips interior points") {
  const ElementFrame frame = realize_element(stretch_element(), single(1.0), 1);
  Vector2 uv;
  REQUIRE(invert_element(frame, frame.map(0.3, 0.7), &uv));
  CHECK((uv - Vector2(0.3, 0.7)).norm() <= 1e-10);
  REQUIRE(invert_element(frame, Vector2(0, 0), &uv));
  CHECK(uv.norm() <= 1e-10);
  CHECK_FALSE(invert_element(frame, Vector2(5.0, 5.0), &uv));
}

TEST_CASE("curved chart inversion round-trips") {
  DesignElement e;
  e.name = "annulus";
  e.curve0 = CurveSpec::arc_sector(AffineExpr::constant_value(1.0), 0.0, 1.2);
  e.curve1 = CurveSpec::arc_sector(AffineExpr::scaled_param(0, 1.0), 0.0, 1.2);
  const ElementFrame frame = realize_element(e, single(2.0), 1);
  for (const Vector2 probe : {Vector2(0.05, 0.95), Vector2(0.5, 0.5), Vector2(0.95, 0.05)}) {
    Vector2 uv;
    REQUIRE(invert_element(frame, frame.map(probe.x(), probe.y()), &uv));
    CHECK((uv - probe).norm() <= 1e-10);
  }
}

TEST_CASE("binding claims only nodes inside the element") {
  const TriMesh mesh = grid_mesh(4, 4, 2.0, 1.0, 1.0, "left", "right", "outer");
  // element covers [0,1]^2 only
  const DeformableMesh dm = bind_elements(mesh, {stretch_element()}, single(1.0));
  int claimed = 0;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const bool inside = mesh.nodes(n, 0) <= 1.0 + 1e-12;
    if (dm.node_element[n] >= 0) {
      ++claimed;
      CHECK(inside);
      CHECK((dm.node_uv(n, 0) >= -1e-9));
      CHECK((dm.node_uv(n, 0) <= 1.0 + 1e-9));
    }
  }
  CHECK(claimed == 15);  // 3 of 5 columns land in [0,1], knock out the seam? no: x in {0,.5,1}
}

TEST_CASE("deformation is the identity at the reference design") {
  const TriMesh mesh = grid_mesh(6, 6, 1.0, 1.0, 0.5, "left", "right", "outer");
  const DeformableMesh dm = bind_elements(mesh, {stretch_element()}, single(1.0));
  const Matrix moved = deformed_nodes(dm, single(1.0));
  CHECK((moved - mesh.nodes).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("claimed nodes follow the stretched chart exactly") {
  const TriMesh mesh = grid_mesh(4, 4, 1.0, 1.0, 0.5, "left", "right", "outer");
  const DeformableMesh dm = bind_elements(mesh, {stretch_element()}, single(1.0));
  const double p = 1.25;
  const Matrix moved = deformed_nodes(dm, single(p));
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    REQUIRE(dm.node_element[n] == 0);
    CHECK(moved(n, 0) == doctest::Approx(mesh.nodes(n, 0)).epsilon(1e-12));
    CHECK(moved(n, 1) == doctest::Approx(p * mesh.nodes(n, 1)).epsilon(1e-12));
  }
}

TEST_CASE("folding the chart reports invalid geometry") {
  const TriMesh mesh = grid_mesh(4, 4, 1.0, 1.0, 0.5, "left", "right", "outer");
  const DeformableMesh dm = bind_elements(mesh, {stretch_element()}, single(1.0));
  CHECK_THROWS_AS((void)deformed_nodes(dm, single(-0.5)), InvalidGeometry);
}

TEST_CASE("node velocities match divided differences of the motion") {
  const TriMesh mesh = grid_mesh(4, 4, 1.0, 1.0, 0.5, "left", "right", "outer");
  const DeformableMesh dm = bind_elements(mesh, {stretch_element()}, single(1.0));
  const double p = 1.1, h = 1e-7;
  const Matrix vel = node_velocities(dm, single(p), 0);
  const Matrix fd = (deformed_nodes(dm, single(p + h)) - deformed_nodes(dm, single(p - h))) /
                    (2 * h);
  CHECK((vel - fd).cwiseAbs().maxCoeff() <= 1e-6);

  Matrix nodes;
  std::vector<Matrix> velocities;
  deform_with_velocities(dm, single(p), &nodes, &velocities);
  CHECK((nodes - deformed_nodes(dm, single(p))).norm() == 0.0);
  REQUIRE(velocities.size() == 1);
  CHECK((velocities[0] - vel).norm() == 0.0);
}

TEST_CASE("reflected charts still claim and move their nodes") {
  // curve0 on top, curve1 on bottom: the chart is a reflection (negative
  // jacobian determinant) but must behave exactly like its mirror image
  DesignElement e;
  e.name = "reflected";
  e.curve0 = CurveSpec::segment(
      {AffineExpr::constant_value(0.0), AffineExpr::scaled_param(0, 1.0)},
      {AffineExpr::constant_value(1.0), AffineExpr::scaled_param(0, 1.0)});
  e.curve1 = CurveSpec::fixed_segment(Vector2(0, 0), Vector2(1, 0));
  const ElementFrame frame = realize_element(e, single(1.0), 1);
  CHECK(frame.jacobian(0.5, 0.5).determinant() < 0.0);

  const TriMesh mesh = grid_mesh(4, 4, 1.0, 1.0, 0.5, "left", "right", "outer");
  const DeformableMesh dm = bind_elements(mesh, {e}, single(1.0));
  int claimed = 0;
  for (int n = 0; n < mesh.num_nodes(); ++n) claimed += dm.node_element[n] >= 0 ? 1 : 0;
  CHECK(claimed == mesh.num_nodes());
  const double p = 1.25;
  const Matrix moved = deformed_nodes(dm, single(p));
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    CHECK(moved(n, 1) == doctest::Approx(p * mesh.nodes(n, 1)).epsilon(1e-12));
  }
}

TEST_CASE("earlier elements win contested nodes") {
  const TriMesh mesh = grid_mesh(4, 2, 1.0, 0.5, 0.5, "left", "right", "outer");
  DesignElement narrow;  // covers x in [0, 0.5]
  narrow.name = "narrow";
  narrow.curve0 = CurveSpec::fixed_segment(Vector2(0, 0), Vector2(0.5, 0));
  narrow.curve1 = CurveSpec::segment(
      {AffineExpr::constant_value(0.0), AffineExpr::scaled_param(0, 0.5)},
      {AffineExpr::constant_value(0.5), AffineExpr::scaled_param(0, 0.5)});
  DesignElement wide = stretch_element();  // covers all of [0,1]x[0,1]
  const DeformableMesh dm = bind_elements(mesh, {narrow, wide}, single(1.0));
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    REQUIRE(dm.node_element[n] >= 0);
    if (mesh.nodes(n, 0) < 0.5 - 1e-9) CHECK(dm.node_element[n] == 0);
    if (mesh.nodes(n, 0) > 0.5 + 1e-9) CHECK(dm.node_element[n] == 1);
  }
}

}  // TEST_SUITE
