#pragma once

#include <array>
#include <vector>

#include "magshape/fem.hpp"
#include "magshape/params.hpp"

namespace magshape {

/// A group of mesh triangles deformed together by one affine map. The map is
/// defined by three subdomain vertices whose coordinates are affine functions
/// of the design vector; at the reference design it is the identity.
struct AffineSubdomain {
  std::array<std::array<AffineExpr, 2>, 3> vertices;
  std::vector<int> triangles;  // mesh triangle indices covered by this map
};

/// x -> A x + shift with det(A) > 0.
struct AffineMap {
  Matrix2 A = Matrix2::Identity();
  Vector2 shift = Vector2::Zero();

  [[nodiscard]] Vector2 operator()(const Vector2& x) const { return A * x + shift; }
};

/// Pullback coefficients of one subdomain map for the assembled quantities:
/// volume scaling for mass/source terms, the four stiffness-factor weights,
/// and the two magnet-load weights.
struct ThetaValues {
  double det = 1.0;
  double kxx = 1.0, kyy = 1.0, kxy = 0.0, kyx = 0.0;
  double jmx = 0.0, jmy = 0.0;
};

[[nodiscard]] ThetaValues theta_values(const Matrix2& A, const Vector2& h_m);
/// Directional derivative of theta_values along dA (h_m fixed).
[[nodiscard]] ThetaValues theta_derivative(const Matrix2& A, const Matrix2& dA, const Vector2& h_m);

/// Parameter-independent factor matrices of one subdomain, all sharing the
/// global sparsity pattern.
struct SubdomainFactors {
  SparseMat kxx, kyy, kxy, kyx, mass;
  Vector load_source, load_mx, load_my;
  Vector2 h_m = Vector2::Zero();           // uniform magnetization (zero if none)
  Eigen::Matrix<double, 2, 3> ref_vertices;
  Matrix2 ref_edges_inv;                   // inverse of reference edge matrix
};

/// Precomputed affine decomposition of the full system: a fixed part plus
/// theta-weighted subdomain factors. Reassembly at a new design is a weighted
/// sum of stored matrices; no element loops.
struct AffineDecomposition {
  Pattern pattern;
  double length = 1.0;
  Vector reference_design;
  SparseMat stiffness0, mass0;
  Vector load_source0, load_magnet0;
  std::vector<AffineSubdomain> subdomains;
  std::vector<SubdomainFactors> factors;

  [[nodiscard]] int num_params() const { return static_cast<int>(reference_design.size()); }
};

/// Builds factors on the reference mesh and validates the decomposition:
/// disjoint triangle lists, invertible reference edge matrices, uniform
/// magnetization per subdomain, and interface consistency (shared nodes get
/// identical motion; nodes touching undecomposed triangles cannot move).
[[nodiscard]] AffineDecomposition build_decomposition(const TriMesh& mesh, const RegionMap& regions,
                                                      std::vector<AffineSubdomain> subdomains,
                                                      const Vector& reference_design, double length,
                                                      const Pattern& pattern);

/// Map of one subdomain at design p (identity at the reference design).
[[nodiscard]] AffineMap subdomain_map(const AffineDecomposition& d, int sub, const Vector& p);
/// d(map)/dp_i; constant in p because vertex bindings are affine.
[[nodiscard]] AffineMap subdomain_map_derivative(const AffineDecomposition& d, int sub, int param);

/// Theta-weighted reassembly at design p. Throws InvalidGeometry when a map
/// degenerates (det <= 0).
[[nodiscard]] AssembledSystem assemble_from_decomposition(const AffineDecomposition& d,
                                                          const Vector& p);

/// Derivative of the assembled system with respect to parameter `param`.
[[nodiscard]] AssembledSystem decomposition_derivative(const AffineDecomposition& d, const Vector& p,
                                                       int param);

/// Node table with every subdomain node moved by its map (consistency-checked
/// on shared nodes); nodes outside all subdomains stay put. This is the
/// vertex-moved geometry that direct reassembly should see.
[[nodiscard]] Matrix affine_deformed_nodes(const TriMesh& mesh, const AffineDecomposition& d,
                                           const Vector& p);

/// d(node position)/dp_i for every node (zero outside subdomains).
[[nodiscard]] Matrix affine_node_velocities(const TriMesh& mesh, const AffineDecomposition& d,
                                            int param);

}  // namespace magshape
