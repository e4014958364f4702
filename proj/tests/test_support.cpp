#include "test_support.hpp"

#include <stdexcept>

namespace magshape::testing {

TriMesh grid_mesh(int nx, int ny, double width, double height, double seam,
                  const std::string& tag_left, const std::string& tag_right,
                  const std::string& boundary_label) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid_mesh: need at least one cell per axis");
  TriMesh mesh;
  mesh.nodes.resize((nx + 1) * (ny + 1), 2);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes.row(j * (nx + 1) + i) << width * i / nx, height * j / ny;
    }
  }
  mesh.region_tags = {tag_left, tag_right};
  mesh.triangles.resize(2 * nx * ny, 3);
  mesh.triangle_region.resize(2 * nx * ny);
  int t = 0;
  const auto node = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = node(i, j), lr = node(i + 1, j);
      const int ul = node(i, j + 1), ur = node(i + 1, j + 1);
      // split on the lr -> ul diagonal
      for (const auto& tri : {Eigen::Vector3i{ll, lr, ul}, Eigen::Vector3i{lr, ur, ul}}) {
        mesh.triangles.row(t) = tri;
        const double cx = (mesh.nodes(tri[0], 0) + mesh.nodes(tri[1], 0) + mesh.nodes(tri[2], 0)) / 3;
        mesh.triangle_region[t] = cx < seam ? 0 : 1;
        ++t;
      }
    }
  }
  std::vector<std::pair<int, int>> rim;
  for (int i = 0; i < nx; ++i) rim.emplace_back(node(i, 0), node(i + 1, 0));
  for (int j = 0; j < ny; ++j) rim.emplace_back(node(nx, j), node(nx, j + 1));
  for (int i = nx; i > 0; --i) rim.emplace_back(node(i, ny), node(i - 1, ny));
  for (int j = ny; j > 0; --j) rim.emplace_back(node(0, j), node(0, j - 1));
  mesh.boundary_edges.resize(static_cast<int>(rim.size()), 2);
  for (int e = 0; e < static_cast<int>(rim.size()); ++e) {
    mesh.boundary_edges.row(e) << rim[e].first, rim[e].second;
  }
  mesh.boundary_labels.assign(rim.size(), boundary_label);
  return mesh;
}

TwoSubdomainToy make_two_subdomain_toy(int cells_per_square) {
  TwoSubdomainToy toy;
  // square cells in each half so the coarse anti-diagonals are mesh edges
  toy.mesh = grid_mesh(2 * cells_per_square, cells_per_square, 2.0, 1.0, 1.0, "magnet", "coil",
                       "outer");

  Material magnet;
  magnet.nu = 1.0 / (1.05 * kMu0);
  magnet.h_m = Vector2(0.0, 8.0e4);
  Material coil;
  coil.nu = 1.0 / kMu0;
  coil.sigma = 1.0e3;
  coil.j_src = 2.0e5;
  toy.regions.materials = {{"magnet", magnet}, {"coil", coil}};
  toy.boundary = {{"outer", BoundaryValue{}}};

  const auto cnst = [](double v) { return AffineExpr::constant_value(v); };
  const AffineExpr seam_x = AffineExpr::scaled_param(0, 1.0);        // p1
  const AffineExpr corner_x = AffineExpr::scaled_param(1, 1.0, 1.0); // 1 + p2
  AffineSubdomain lower_left, upper_left, lower_right, upper_right;
  lower_left.vertices = {{{cnst(0), cnst(0)}, {seam_x, cnst(0)}, {cnst(0), cnst(1)}}};
  upper_left.vertices = {{{seam_x, cnst(0)}, {seam_x, cnst(1)}, {cnst(0), cnst(1)}}};
  lower_right.vertices = {{{seam_x, cnst(0)}, {cnst(2), cnst(0)}, {seam_x, cnst(1)}}};
  upper_right.vertices = {{{cnst(2), cnst(0)}, {corner_x, cnst(1)}, {seam_x, cnst(1)}}};

  for (int t = 0; t < toy.mesh.num_triangles(); ++t) {
    const Eigen::Vector3i tri = toy.mesh.triangles.row(t);
    const double cx = (toy.mesh.nodes(tri[0], 0) + toy.mesh.nodes(tri[1], 0) +
                       toy.mesh.nodes(tri[2], 0)) / 3;
    const double cy = (toy.mesh.nodes(tri[0], 1) + toy.mesh.nodes(tri[1], 1) +
                       toy.mesh.nodes(tri[2], 1)) / 3;
    if (cx < 1.0) {
      (cx + cy < 1.0 ? lower_left : upper_left).triangles.push_back(t);
    } else {
      ((cx - 1.0) + cy < 1.0 ? lower_right : upper_right).triangles.push_back(t);
    }
  }
  toy.subdomains = {lower_left, upper_left, lower_right, upper_right};

  toy.reference = Vector::Constant(2, 1.0);
  toy.box.lower = Vector::Constant(2, 0.7);
  toy.box.upper = Vector::Constant(2, 1.3);
  toy.pattern = build_pattern(toy.mesh);
  toy.decomposition = build_decomposition(toy.mesh, toy.regions, toy.subdomains, toy.reference,
                                          toy.length, toy.pattern);
  return toy;
}

double relative_gap(const SparseMat& candidate, const SparseMat& reference) {
  return (candidate - reference).norm() / reference.norm();
}

double relative_gap(const Vector& candidate, const Vector& reference) {
  return (candidate - reference).norm() / reference.norm();
}

}  // namespace magshape::testing
