#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "magshape/types.hpp"

namespace magshape {

/// Thrown when a candidate design produces invalid geometry (folded elements,
/// inverted triangles). Optimizers treat it as an infeasible trial point.
struct InvalidGeometry : std::runtime_error {
  explicit InvalidGeometry(const std::string& what) : std::runtime_error(what) {}
};

/// Triangle mesh in meters. Triangles are stored counter-clockwise; the loader
/// fixes orientation and rejects triangles with area <= 1e-16 m^2.
struct TriMesh {
  Matrix nodes;                        // N x 2
  Eigen::MatrixX3i triangles;          // M x 3 node ids
  std::vector<int> triangle_region;    // M region-tag indices
  std::vector<std::string> region_tags;
  Eigen::MatrixX2i boundary_edges;     // B x 2 node ids
  std::vector<std::string> boundary_labels;  // B labels

  [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes.rows()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles.rows()); }
  [[nodiscard]] int region_index(const std::string& tag) const;
};

/// Area and shape-function gradient coefficients of one triangle:
/// grad N_i = (b_i, c_i) / (2 area).
struct TriangleGeometry {
  double area = 0.0;
  Eigen::Vector3d b;  // b_i = y_j - y_k (cyclic)
  Eigen::Vector3d c;  // c_i = x_k - x_j (cyclic)
};

[[nodiscard]] TriangleGeometry triangle_geometry(const Matrix& nodes,
                                                 const Eigen::Vector3i& tri);
[[nodiscard]] TriangleGeometry triangle_geometry(const TriMesh& mesh, int t);

/// Signed area of triangle t under an alternative node table (same topology).
[[nodiscard]] double signed_area(const Matrix& nodes, const Eigen::Vector3i& tri);

[[nodiscard]] TriMesh load_mesh(const std::string& text);
[[nodiscard]] TriMesh load_mesh_file(const std::string& path);
void save_mesh_file(const TriMesh& mesh, const std::string& path,
                    const std::string& header_comment = "");

/// Index of the triangle containing a point (barycentric test with tolerance),
/// or -1 if the point is outside the mesh.
[[nodiscard]] int find_triangle(const TriMesh& mesh, const Vector2& point,
                                double tol = 1e-12);

/// Material data of one region. Exactly one of j_src, h_m may be nonzero.
struct Material {
  double nu = 1.0 / kMu0;   // reluctivity [m/H]
  double sigma = 0.0;       // conductivity [S/m]
  double j_src = 0.0;       // source current density [A/m^2]
  Vector2 h_m = Vector2::Zero();  // magnetization field [A/m]
};

/// Region tag -> material. Every tag used by the mesh must be present.
struct RegionMap {
  std::unordered_map<std::string, Material> materials;

  [[nodiscard]] const Material& at(const std::string& tag) const;
  void validate(const TriMesh& mesh) const;
};

}  // namespace magshape
