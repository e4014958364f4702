#pragma once

#include "magshape/types.hpp"

namespace magshape {

/// Convex inequality-constrained quadratic program
///   min 0.5 x'Hx + g'x   s.t.  A x <= b
/// with H symmetric positive definite.
struct QpProblem {
  Matrix hessian;      // n x n
  Vector gradient;     // n
  Matrix constraints;  // m x n (m may be 0)
  Vector bounds;       // m
};

struct QpResult {
  Vector x;
  Vector multipliers;     // m, >= 0, zero off the active set
  bool converged = false;
  bool infeasible = false;  // constraints inconsistent; x minimizes an elastic relaxation
  int iterations = 0;
};

struct QpSettings {
  double tol = 1e-10;       // KKT and feasibility tolerance
  int max_iterations = 0;   // 0 -> 50 * (n + m + 1)
};

/// Primal active-set method started from the origin (phase-1 elastic start
/// when the origin is infeasible). Throws std::runtime_error on cycling.
[[nodiscard]] QpResult qp_solve(const QpProblem& qp, const QpSettings& settings = {});

}  // namespace magshape
