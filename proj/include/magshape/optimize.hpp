#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "magshape/ledger.hpp"
#include "magshape/params.hpp"
#include "magshape/types.hpp"

namespace magshape {

/// Smooth constrained problem: minimize objective(p) subject to the
/// constraint set. `gradient` may be empty for derivative-free solvers.
/// `initial_hessian` optionally seeds SQP's quasi-Newton model with problem
/// curvature (e.g. a Gauss-Newton matrix); identity otherwise.
struct OptimizationProblem {
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> initial_hessian;
  ConstraintSet constraints;
  Vector initial;
  SolveLedger* ledger = nullptr;

  [[nodiscard]] int dim() const { return static_cast<int>(initial.size()); }
  [[nodiscard]] double eval_objective(const Vector& p) const;
  [[nodiscard]] Vector eval_gradient(const Vector& p) const;
  [[nodiscard]] Vector eval_constraints(const Vector& p) const;
  [[nodiscard]] Matrix eval_constraint_gradients(const Vector& p) const;
};

/// One per-iteration progress row, serialized into convergence CSVs.
struct IterationRecord {
  int iteration = 0;
  double best_objective = 0.0;
  double stationarity = 0.0;  // SQP: KKT residual; PSO: mean distance to swarm best
  double step = 0.0;          // SQP: step norm;    PSO: iterations since last improvement
  std::int64_t objective_evals = 0;
  std::int64_t fe_solves = 0;
  std::int64_t fe_backsolves = 0;
};

struct OptimizeResult {
  Vector minimizer;
  double minimum = 0.0;
  bool converged = false;
  std::string status;
  int iterations = 0;
  Vector multipliers;  // SQP only, one per constraint row
  std::vector<IterationRecord> history;
};

struct SqpSettings {
  int max_iterations = 100;
  double kkt_tol = 1e-8;
  double bfgs_damping = 0.2;    // Powell damping threshold
  double merit_growth = 1.5;    // penalty >= growth * |multiplier|_inf
  double armijo_c = 1e-4;
  int max_halvings = 30;
};

/// Damped-BFGS sequential quadratic programming with an l1 merit line search.
/// Requires an objective gradient and gradients for all constraint rows.
[[nodiscard]] OptimizeResult sqp_solve(const OptimizationProblem& problem,
                                       const SqpSettings& settings = {});

struct PsoSettings {
  int swarm = 40;
  int max_iterations = 100;
  double inertia = 0.5;
  double cognitive = 1.49;  // pull toward the particle's own best
  double social = 1.49;     // pull toward the swarm best
  int stall_limit = 15;     // iterations without swarm-best improvement
  double cluster_tol = 1e-6;  // mean distance to the swarm best
  std::uint64_t seed = 1;
  bool hull_skip = false;   // skip expensive constraints inside the hull of cleared points
  int hull_capacity = 30;
};

/// Particle-swarm search over a finite box. Nonlinear constraint rows gate
/// best updates; rows marked expensive are checked only after the cheap rows
/// pass. Objective exceptions (invalid geometry) count as infeasible.
[[nodiscard]] OptimizeResult pso_solve(const OptimizationProblem& problem,
                                       const PsoSettings& settings = {});

}  // namespace magshape
