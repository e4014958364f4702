#pragma once

#include "magshape/optimize.hpp"

namespace magshape {

/// Linearized worst case of a function over the uncertainty box:
///   max { F(p) + grad·delta : |delta_i| <= radius_i } = F(p) + sum_i radius_i |grad_i|.
[[nodiscard]] double worst_case_value(double value, const Vector& gradient,
                                      const UncertaintySet& u);

/// The maximizing corner delta* (delta_i = radius_i * sign(grad_i); +radius on ties).
[[nodiscard]] Vector worst_case_shift(const Vector& gradient, const UncertaintySet& u);

/// Robust objective at p: objective + l1 norm of the radius-scaled gradient.
[[nodiscard]] double robust_objective_value(const OptimizationProblem& base,
                                            const UncertaintySet& u, const Vector& p);

/// Exact corner check: evaluates every constraint row at all 2^I corners of
/// the uncertainty box around p.
struct CornerCheck {
  bool feasible = true;
  double worst_violation = 0.0;
  Vector worst_corner;  // the shift delta realizing the worst violation
};
[[nodiscard]] CornerCheck corner_feasibility(const ConstraintSet& constraints, const Vector& p,
                                             const UncertaintySet& u, double tol = 0.0);

struct RobustSettings {
  double hessian_rel_step = 1e-5;  // central-difference step for gradient curvature
};

/// Smooth slack reformulation of the linearized worst-case program over
/// z = [p, xi_0, xi_1, ..., xi_M]:
///   min  f(p) + 1'xi_0
///   s.t. g_m(p) + 1'xi_m <= 0                      (every base row m)
///        +-(radius_i * dF_m/dp_i) - xi_{m,i} <= 0  (F_0 = f, F_m = g_m)
/// Slack-row gradients use finite-difference curvature of the base gradients,
/// cached per design point.
struct RobustProblem {
  OptimizationProblem expanded;
  int base_dim = 0;
  int base_rows = 0;

  [[nodiscard]] Vector design_part(const Vector& z) const { return z.head(base_dim); }
};

[[nodiscard]] RobustProblem robustify(const OptimizationProblem& base, const UncertaintySet& u,
                                      const RobustSettings& settings = {});

}  // namespace magshape
