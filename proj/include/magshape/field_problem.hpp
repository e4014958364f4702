#pragma once

#include <memory>
#include <vector>

#include "magshape/affine.hpp"
#include "magshape/design_element.hpp"
#include "magshape/fem.hpp"
#include "magshape/optimize.hpp"

namespace magshape {

/// One flux-matching sample: hit `goal` at `location` (reference coordinates).
struct FluxTarget {
  Vector2 location;
  Vector2 goal;
};

struct FieldProblemConfig {
  RegionMap regions;
  DirichletSpec boundary;
  double length = 1.0;
  std::vector<FluxTarget> targets;
  bool mean = false;  // average instead of sum the squared deviations
  SolveMethod method = SolveMethod::Direct;
};

struct FieldEvaluation {
  double objective = 0.0;
  Vector dofs;
  Matrix nodes;
  std::vector<Vector2> fluxes;  // one per target
};

/// Field-driven least-squares objective J(p) = sum_k |B(x_k; p) - goal_k|^2
/// with analytic design derivatives via direct state sensitivities.
class FieldProblem {
 public:
  virtual ~FieldProblem() = default;
  [[nodiscard]] virtual const TriMesh& mesh() const = 0;
  [[nodiscard]] virtual int num_params() const = 0;
  [[nodiscard]] virtual const FieldProblemConfig& config() const = 0;

  [[nodiscard]] FieldEvaluation evaluate(const Vector& p, SolveLedger* ledger) const {
    return solved(p, ledger).eval;
  }
  [[nodiscard]] double objective(const Vector& p, SolveLedger* ledger) const {
    return evaluate(p, ledger).objective;
  }

  /// Exact objective gradient, contracted from the flux Jacobian.
  [[nodiscard]] Vector gradient(const Vector& p, SolveLedger* ledger) const;

  /// Gauss-Newton curvature 2 sum_k w J_k^T J_k of the tracking objective;
  /// positive semidefinite. Costs one backsolve per parameter on top of the
  /// (cached) field solve, so it is cheap wherever the gradient is.
  [[nodiscard]] Matrix gauss_newton(const Vector& p, SolveLedger* ledger) const;

 protected:
  /// Latest factorized solve, reused when objective, gradient and curvature
  /// are asked at the same point (extras then cost only backsolves).
  struct SolveCache {
    Vector p;
    std::unique_ptr<FieldSolve> solve;
    FieldEvaluation eval;
    bool has_jacobian = false;
    Matrix jac_x, jac_y;  // targets x params: d(flux)/dp, implicit + shape terms

    [[nodiscard]] bool holds(const Vector& point) const {
      return solve && p.size() == point.size() && (p.array() == point.array()).all();
    }
  };

  [[nodiscard]] virtual const SolveCache& solved(const Vector& p, SolveLedger* ledger) const = 0;
  [[nodiscard]] virtual const SolveCache& jacobian(const Vector& p, SolveLedger* ledger) const = 0;
};

/// Parametrization by morphing design elements: nodes follow their claimed
/// element, the mesh is re-assembled on the deformed geometry.
class DeformedFieldProblem final : public FieldProblem {
 public:
  DeformedFieldProblem(DeformableMesh binding, FieldProblemConfig config);

  [[nodiscard]] const TriMesh& mesh() const override { return binding_.reference; }
  [[nodiscard]] int num_params() const override { return binding_.num_params; }
  [[nodiscard]] const FieldProblemConfig& config() const override { return config_; }
  [[nodiscard]] const DeformableMesh& binding() const { return binding_; }

 private:
  [[nodiscard]] const SolveCache& solved(const Vector& p, SolveLedger* ledger) const override;
  [[nodiscard]] const SolveCache& jacobian(const Vector& p, SolveLedger* ledger) const override;

  DeformableMesh binding_;
  FieldProblemConfig config_;
  Pattern pattern_;
  std::vector<int> target_triangles_;
  mutable SolveCache cache_;
};

/// Parametrization by an affine subdomain decomposition: reassembly is a
/// theta-weighted sum of precomputed factors.
class AffineFieldProblem final : public FieldProblem {
 public:
  AffineFieldProblem(TriMesh mesh, AffineDecomposition decomposition, FieldProblemConfig config);

  [[nodiscard]] const TriMesh& mesh() const override { return mesh_; }
  [[nodiscard]] int num_params() const override { return decomposition_.num_params(); }
  [[nodiscard]] const FieldProblemConfig& config() const override { return config_; }
  [[nodiscard]] const AffineDecomposition& decomposition() const { return decomposition_; }

 private:
  [[nodiscard]] const SolveCache& solved(const Vector& p, SolveLedger* ledger) const override;
  [[nodiscard]] const SolveCache& jacobian(const Vector& p, SolveLedger* ledger) const override;

  TriMesh mesh_;
  AffineDecomposition decomposition_;
  FieldProblemConfig config_;
  std::vector<int> target_triangles_;
  mutable SolveCache cache_;
};

/// Wrap a field problem as an optimization problem over the given box.
[[nodiscard]] OptimizationProblem make_optimization(std::shared_ptr<const FieldProblem> problem,
                                                    BoxBounds box, Vector initial,
                                                    SolveLedger* ledger);

}  // namespace magshape
