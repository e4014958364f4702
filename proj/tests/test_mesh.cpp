#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "magshape/mesh.hpp"

using namespace magshape;

namespace {

const char* kUnitTriangle = R"(# smallest useful mesh
NODES 3
0 0
1 0
0 1
TRIANGLES 1
0 1 2 iron
BOUNDARY 3
0 1 outer
1 2 outer
2 0 outer
)";

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("unit right triangle loads with its region and boundary") {
  const TriMesh mesh = load_mesh(kUnitTriangle);
  CHECK(mesh.num_nodes() == 3);
  CHECK(mesh.num_triangles() == 1);
  CHECK(mesh.region_tags == std::vector<std::string>{"iron"});
  CHECK(mesh.region_index("iron") == 0);
  CHECK(mesh.region_index("absent") == -1);
  CHECK(mesh.boundary_edges.rows() == 3);
  CHECK(mesh.boundary_labels[1] == "outer");
  CHECK(signed_area(mesh.nodes, mesh.triangles.row(0)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("clockwise triangles are reoriented counter-clockwise") {
  const std::string flipped = R"(NODES 3
0 0
1 0
0 1
TRIANGLES 1
0 2 1 iron
BOUNDARY 0
)";
  const TriMesh mesh = load_mesh(flipped);
  CHECK(signed_area(mesh.nodes, mesh.triangles.row(0)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("degenerate triangles are rejected with a line number") {
  const std::string collinear = R"(NODES 3
0 0
1 0
2 0
TRIANGLES 1
0 1 2 iron
BOUNDARY 0
)";
  CHECK_THROWS_WITH_AS((void)load_mesh(collinear), doctest::Contains("line 6"),
                       std::runtime_error);
}

TEST_CASE("out-of-range node ids are rejected with a line number") {
  const std::string bad = R"(NODES 3
0 0
1 0
0 1
TRIANGLES 1
0 1 5 iron
BOUNDARY 0
)";
  CHECK_THROWS_WITH_AS((void)load_mesh(bad), doctest::Contains("line 6"), std::runtime_error);
}

TEST_CASE("truncated sections are rejected") {
  CHECK_THROWS_AS((void)load_mesh("NODES 2\n0 0\n"), std::runtime_error);
  CHECK_THROWS_AS((void)load_mesh("TRIANGLES 0\nBOUNDARY 0\n"), std::runtime_error);
}

TEST_CASE("shape gradients of the unit right triangle") {
  const TriMesh mesh = load_mesh(kUnitTriangle);
  const TriangleGeometry g = triangle_geometry(mesh, 0);
  CHECK(g.area == doctest::Approx(0.5).epsilon(1e-15));
  const double inv = 1.0 / (2.0 * g.area);
  CHECK(g.b[0] * inv == doctest::Approx(-1.0));
  CHECK(g.c[0] * inv == doctest::Approx(-1.0));
  CHECK(g.b[1] * inv == doctest::Approx(1.0));
  CHECK(g.c[1] * inv == doctest::Approx(0.0));
  CHECK(g.b[2] * inv == doctest::Approx(0.0));
  CHECK(g.c[2] * inv == doctest::Approx(1.0));
}

TEST_CASE("scaling nodes by two quarters the gradients") {
  TriMesh mesh = load_mesh(kUnitTriangle);
  const TriangleGeometry before = triangle_geometry(mesh, 0);
  mesh.nodes *= 2.0;
  const TriangleGeometry after = triangle_geometry(mesh, 0);
  CHECK(after.area == doctest::Approx(4.0 * before.area).epsilon(1e-15));
  for (int i = 0; i < 3; ++i) {
    const double gx_before = before.b[i] / (2.0 * before.area);
    const double gx_after = after.b[i] / (2.0 * after.area);
    CHECK(gx_after == doctest::Approx(0.5 * gx_before).epsilon(1e-14));
  }
}

TEST_CASE("hand-worked coefficients of a lopsided triangle") {
  Matrix nodes(3, 2);
  nodes << 0, 0, 2, 0, 1, 3;
  const TriangleGeometry g = triangle_geometry(nodes, Eigen::Vector3i(0, 1, 2));
  CHECK(g.area == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(g.b[0] == doctest::Approx(-3.0));
  CHECK(g.b[1] == doctest::Approx(3.0));
  CHECK(g.b[2] == doctest::Approx(0.0));
  CHECK(g.c[0] == doctest::Approx(-1.0));
  CHECK(g.c[1] == doctest::Approx(-1.0));
  CHECK(g.c[2] == doctest::Approx(2.0));
  CHECK(std::abs(g.b.sum()) <= 1e-14);
  CHECK(std::abs(g.c.sum()) <= 1e-14);
}

TEST_CASE("file round trip preserves regions and boundary labels") {
  const TriMesh mesh = load_mesh(kUnitTriangle);
  const std::string path =
      (std::filesystem::temp_directory_path() / "magshape_mesh_roundtrip.mesh").string();
  save_mesh_file(mesh, path, "round trip");
  const TriMesh back = load_mesh_file(path);
  std::filesystem::remove(path);
  CHECK((back.nodes - mesh.nodes).norm() == 0.0);
  CHECK((back.triangles - mesh.triangles).norm() == 0);
  CHECK(back.region_tags == mesh.region_tags);
  CHECK(back.triangle_region == mesh.triangle_region);
  CHECK((back.boundary_edges - mesh.boundary_edges).norm() == 0);
  CHECK(back.boundary_labels == mesh.boundary_labels);
}

TEST_CASE("point location finds the containing triangle") {
  const TriMesh mesh = load_mesh(kUnitTriangle);
  CHECK(find_triangle(mesh, Vector2(0.25, 0.25)) == 0);
  CHECK(find_triangle(mesh, Vector2(0.9, 0.9)) == -1);
  CHECK(find_triangle(mesh, Vector2(0.0, 0.0)) == 0);  // vertex counts as inside
}

TEST_CASE("region maps must cover every mesh tag") {
  const TriMesh mesh = load_mesh(kUnitTriangle);
  RegionMap regions;
  CHECK_THROWS_AS(regions.validate(mesh), std::exception);
  regions.materials["iron"] = Material{};
  CHECK_NOTHROW(regions.validate(mesh));
  CHECK_THROWS_AS((void)regions.at("absent"), std::exception);
}

}  // TEST_SUITE
