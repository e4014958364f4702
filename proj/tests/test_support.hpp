#pragma once

#include <string>
#include <vector>

#include "magshape/affine.hpp"
#include "magshape/fem.hpp"

namespace magshape::testing {

/// Structured triangulation of [0,width]x[0,height] with nx*ny cells, each
/// split along its lower-right -> upper-left diagonal. Triangles left of
/// `seam` get tag_left, the rest tag_right; all outer edges share one label.
[[nodiscard]] TriMesh grid_mesh(int nx, int ny, double width, double height, double seam,
                                const std::string& tag_left, const std::string& tag_right,
                                const std::string& boundary_label);

/// Rectangle [0,2]x[0,1]: magnetized left half, conducting coil right half,
/// A_z = 0 on the outer boundary. Decomposed into four affine triangles with
/// two parameters: p1 slides the half-plane seam, p2 slides the top-right
/// corner to (1+p2, 1) (shearing the upper-right triangle). Reference (1,1);
/// both maps stay orientation-preserving on [0.7, 1.3]^2.
struct TwoSubdomainToy {
  TriMesh mesh;
  RegionMap regions;
  DirichletSpec boundary;
  std::vector<AffineSubdomain> subdomains;
  Vector reference;
  BoxBounds box;
  Pattern pattern;
  AffineDecomposition decomposition;
  double length = 0.3;
};

[[nodiscard]] TwoSubdomainToy make_two_subdomain_toy(int cells_per_square = 8);

/// Frobenius distance relative to the norm of `reference`.
[[nodiscard]] double relative_gap(const SparseMat& candidate, const SparseMat& reference);
[[nodiscard]] double relative_gap(const Vector& candidate, const Vector& reference);

}  // namespace magshape::testing
