#pragma once

#include <functional>

#include "magshape/fem.hpp"

namespace magshape {

/// Derivative of the directly assembled system along a node velocity field
/// (same layout as AssembledSystem: stiffness = dK, loads = dj). Dirichlet
/// data is assumed design-independent along the motion.
[[nodiscard]] AssembledSystem assembly_derivative(const TriMesh& mesh, const Matrix& nodes,
                                                  const Matrix& velocities, const RegionMap& regions,
                                                  double length, const Pattern& pattern);

/// Direct sensitivity of the state: solves K_ff s_f = (dj - dK a)_f through
/// the existing factorization; zero on Dirichlet dofs.
[[nodiscard]] Vector solve_sensitivity(const FieldSolve& solve, const AssembledSystem& derivative,
                                       const Vector& dofs);

/// Derivative of the in-triangle flux density with respect to node motion at
/// fixed dofs.
[[nodiscard]] Vector2 flux_density_shape_derivative(const Matrix& nodes, const Matrix& velocities,
                                                    const Eigen::Vector3i& tri, const Vector& dofs,
                                                    double length);

/// Central (default) or forward finite-difference gradient with relative step
/// h_i = rel_step * max(|p_i|, 1).
[[nodiscard]] Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& p,
                                 double rel_step = 1e-6, bool central = true);

}  // namespace magshape
