#pragma once

#include <string>
#include <vector>

#include "magshape/mesh.hpp"
#include "magshape/nurbs.hpp"

namespace magshape {

/// Ruled patch between two bounding curves:
///   f(xh, yh) = curve1(xh) * yh + curve0(xh) * (1 - yh),  (xh, yh) in [0,1]^2.
struct DesignElement {
  std::string name;
  CurveSpec curve0;  // image of the edge yh = 0
  CurveSpec curve1;  // image of the edge yh = 1
};

/// Element realized at a specific design vector.
struct ElementFrame {
  CurveJet c0, c1;

  [[nodiscard]] Vector2 map(double xh, double yh) const;
  [[nodiscard]] Matrix2 jacobian(double xh, double yh) const;
  /// df/dp_i at fixed local coordinates.
  [[nodiscard]] Vector2 map_param_derivative(double xh, double yh, int param) const;
  /// Point, local Jacobian, and their derivatives for every parameter.
  void eval_all(double xh, double yh, Vector2* point, Matrix2* jac,
                std::vector<Vector2>* d_point, std::vector<Matrix2>* d_jac) const;
  /// Characteristic length (control-net bounding box diagonal).
  [[nodiscard]] double diameter() const;
};

[[nodiscard]] ElementFrame realize_element(const DesignElement& e, const Vector& p, int num_params);

struct InvertSettings {
  int grid = 3;               // multistart grid per axis
  int max_iterations = 50;    // Newton iterations per start
  int max_halvings = 30;      // step damping
  double residual_rel = 1e-10;  // convergence: |f(uv) - x| <= residual_rel * diameter
};

/// Newton inversion of the element map, multistart on a coarse grid, damped
/// steps, iterates clamped to [0,1]^2. Returns false when no start converges.
[[nodiscard]] bool invert_element(const ElementFrame& frame, const Vector2& x, Vector2* uv,
                                  const InvertSettings& settings = {});

/// A mesh bound to design elements: each node is either fixed or carries the
/// local coordinates of the element that claims it. Preimages are computed
/// once at the reference design and held fixed afterwards.
struct DeformableMesh {
  TriMesh reference;
  std::vector<DesignElement> elements;
  int num_params = 0;
  Vector reference_design;
  Eigen::VectorXi node_element;  // -1 = fixed node
  Matrix node_uv;                // local coordinates, nodes x 2
};

struct BindSettings {
  InvertSettings invert;
  double inside_tol = 1e-9;    // uv acceptance margin around [0,1]^2
  double det_rel_tol = 1e-8;   // reject claims where |det J| <= tol * diameter^2
};

/// Claim nodes for elements, earlier elements first. A node is claimed by the
/// first element whose inverse lands inside the unit square with a healthy
/// Jacobian; nodes claimed by no element stay fixed.
[[nodiscard]] DeformableMesh bind_elements(const TriMesh& mesh, std::vector<DesignElement> elements,
                                           const Vector& reference_design,
                                           const BindSettings& settings = {});

/// Node positions at design p (fixed nodes keep their reference position).
/// Throws InvalidGeometry if any triangle area becomes nonpositive.
[[nodiscard]] Matrix deformed_nodes(const DeformableMesh& dm, const Vector& p);

/// d(node position)/dp_i at fixed local coordinates, nodes x 2.
[[nodiscard]] Matrix node_velocities(const DeformableMesh& dm, const Vector& p, int param);

/// Deformed positions plus velocities for all parameters in one pass.
void deform_with_velocities(const DeformableMesh& dm, const Vector& p, Matrix* nodes,
                            std::vector<Matrix>* velocities);

}  // namespace magshape
