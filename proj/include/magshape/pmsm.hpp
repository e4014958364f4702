#pragma once

#include "magshape/optimize.hpp"
#include "magshape/params.hpp"

namespace magshape {

/// Analytic surrogate of a magnet-sizing task: minimize magnet cross-section
/// p1*p2 (mm^2) subject to a back-EMF requirement and two packaging limits.
/// Design vector p = (magnet width, magnet height, rotor offset), all mm.
struct SizingConfig {
  double emf_width = 1.0;                       // dE/dp1 (V/mm), calibrated
  double emf_height = 1.6242857142857143;       // dE/dp2 (V/mm), calibrated
  double emf_required = 30.37;                  // V
  double ring_limit = 15.0;                     // p2 + p3 <= ring_limit
  double bar_limit = 50.0;                      // 3 p1 - 2 p3 <= bar_limit
  Vector lower = (Vector(3) << 1.0, 1.0, 5.0).finished();
  Vector upper = (Vector(3) << kInf, kInf, 14.0).finished();
  Vector swarm_upper = (Vector(3) << 40.0, 15.0, 14.0).finished();  // finite box for sampling
  Vector initial = (Vector(3) << 19.0, 7.0, 7.0).finished();
};

[[nodiscard]] double sizing_emf(const SizingConfig& config, const Vector& p);

/// Smooth formulation with analytic gradients; the EMF row is flagged
/// expensive (it stands in for a field evaluation).
[[nodiscard]] OptimizationProblem sizing_problem(const SizingConfig& config,
                                                 SolveLedger* ledger = nullptr);

/// Steep penalty exp(4 t^0.1) - 1 of a constraint violation t > 0 (mm).
[[nodiscard]] double violation_penalty(double t);

/// Box-only variant for swarm search: constraint violations multiply the
/// objective through `violation_penalty`.
[[nodiscard]] OptimizationProblem sizing_problem_penalized(const SizingConfig& config,
                                                           SolveLedger* ledger = nullptr);

}  // namespace magshape
