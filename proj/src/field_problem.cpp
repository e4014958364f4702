#include "magshape/field_problem.hpp"

#include <stdexcept>
#include <utility>

#include "magshape/sensitivity.hpp"

namespace magshape {
namespace {

std::vector<int> locate_targets(const TriMesh& mesh, const std::vector<FluxTarget>& targets) {
  std::vector<int> tris;
  tris.reserve(targets.size());
  for (const FluxTarget& t : targets) {
    const int tri = find_triangle(mesh, t.location);
    if (tri < 0) {
      throw std::invalid_argument("flux target (" + std::to_string(t.location.x()) + ", " +
                                  std::to_string(t.location.y()) + ") lies outside the mesh");
    }
    tris.push_back(tri);
  }
  return tris;
}

double target_weight(const FieldProblemConfig& config) {
  return (config.mean && !config.targets.empty()) ? 1.0 / static_cast<double>(config.targets.size())
                                                  : 1.0;
}

void fill_fluxes(const TriMesh& mesh, const FieldProblemConfig& config,
                 const std::vector<int>& tris, FieldEvaluation* out) {
  const double w = target_weight(config);
  out->fluxes.clear();
  out->fluxes.reserve(tris.size());
  out->objective = 0.0;
  for (std::size_t k = 0; k < tris.size(); ++k) {
    const Eigen::Vector3i tri = mesh.triangles.row(tris[k]).transpose();
    const Vector2 flux = flux_density(out->nodes, tri, out->dofs, config.length);
    out->fluxes.push_back(flux);
    out->objective += w * (flux - config.targets[k].goal).squaredNorm();
  }
}

/// Total flux derivative at one target for one parameter: the state part
/// (sensitivity dofs through the same curl) plus the mesh-motion part.
Vector2 flux_parameter_derivative(const Matrix& nodes, const Matrix& velocities,
                                  const Eigen::Vector3i& tri, const Vector& dofs,
                                  const Vector& sensitivity, double length) {
  return flux_density(nodes, tri, sensitivity, length) +
         flux_density_shape_derivative(nodes, velocities, tri, dofs, length);
}

}  // namespace

Vector FieldProblem::gradient(const Vector& p, SolveLedger* ledger) const {
  const SolveCache& c = jacobian(p, ledger);
  const FieldProblemConfig& cfg = config();
  const double w = target_weight(cfg);
  Vector grad = Vector::Zero(num_params());
  for (std::size_t k = 0; k < cfg.targets.size(); ++k) {
    const Vector2 r = c.eval.fluxes[k] - cfg.targets[k].goal;
    grad += 2.0 * w *
            (r.x() * c.jac_x.row(static_cast<int>(k)).transpose() +
             r.y() * c.jac_y.row(static_cast<int>(k)).transpose());
  }
  return grad;
}

Matrix FieldProblem::gauss_newton(const Vector& p, SolveLedger* ledger) const {
  const SolveCache& c = jacobian(p, ledger);
  const double w = target_weight(config());
  return 2.0 * w * (c.jac_x.transpose() * c.jac_x + c.jac_y.transpose() * c.jac_y);
}

DeformedFieldProblem::DeformedFieldProblem(DeformableMesh binding, FieldProblemConfig config)
    : binding_(std::move(binding)),
      config_(std::move(config)),
      pattern_(build_pattern(binding_.reference)),
      target_triangles_(locate_targets(binding_.reference, config_.targets)) {}

const FieldProblem::SolveCache& DeformedFieldProblem::solved(const Vector& p,
                                                             SolveLedger* ledger) const {
  if (!cache_.holds(p)) {
    cache_.solve.reset();  // release the old factorization before rebuilding
    cache_.p = p;
    cache_.eval = FieldEvaluation{};
    cache_.has_jacobian = false;
    cache_.eval.nodes = deformed_nodes(binding_, p);
    const AssembledSystem sys = assemble_system(binding_.reference, cache_.eval.nodes,
                                                config_.regions, config_.length, pattern_);
    const ConstrainedSystem cs =
        apply_dirichlet(sys, binding_.reference, cache_.eval.nodes, config_.boundary);
    cache_.solve = std::make_unique<FieldSolve>(cs, config_.method, ledger);
    cache_.eval.dofs = cache_.solve->solution();
    fill_fluxes(binding_.reference, config_, target_triangles_, &cache_.eval);
  }
  return cache_;
}

const FieldProblem::SolveCache& DeformedFieldProblem::jacobian(const Vector& p,
                                                               SolveLedger* ledger) const {
  (void)solved(p, ledger);
  if (!cache_.has_jacobian) {
    Matrix nodes;
    std::vector<Matrix> velocities;
    deform_with_velocities(binding_, p, &nodes, &velocities);
    const TriMesh& mesh = binding_.reference;
    const Vector& dofs = cache_.eval.dofs;
    const int targets = static_cast<int>(target_triangles_.size());
    cache_.jac_x.resize(targets, binding_.num_params);
    cache_.jac_y.resize(targets, binding_.num_params);
    for (int i = 0; i < binding_.num_params; ++i) {
      const AssembledSystem deriv = assembly_derivative(mesh, nodes, velocities[i], config_.regions,
                                                        config_.length, pattern_);
      const Vector s = solve_sensitivity(*cache_.solve, deriv, dofs);
      for (int k = 0; k < targets; ++k) {
        const Eigen::Vector3i tri = mesh.triangles.row(target_triangles_[k]).transpose();
        const Vector2 db =
            flux_parameter_derivative(nodes, velocities[i], tri, dofs, s, config_.length);
        cache_.jac_x(k, i) = db.x();
        cache_.jac_y(k, i) = db.y();
      }
    }
    cache_.has_jacobian = true;
  }
  return cache_;
}

AffineFieldProblem::AffineFieldProblem(TriMesh mesh, AffineDecomposition decomposition,
                                       FieldProblemConfig config)
    : mesh_(std::move(mesh)),
      decomposition_(std::move(decomposition)),
      config_(std::move(config)),
      target_triangles_(locate_targets(mesh_, config_.targets)) {}

const FieldProblem::SolveCache& AffineFieldProblem::solved(const Vector& p,
                                                           SolveLedger* ledger) const {
  if (!cache_.holds(p)) {
    cache_.solve.reset();
    cache_.p = p;
    cache_.eval = FieldEvaluation{};
    cache_.has_jacobian = false;
    cache_.eval.nodes = affine_deformed_nodes(mesh_, decomposition_, p);
    const AssembledSystem sys = assemble_from_decomposition(decomposition_, p);
    const ConstrainedSystem cs = apply_dirichlet(sys, mesh_, cache_.eval.nodes, config_.boundary);
    cache_.solve = std::make_unique<FieldSolve>(cs, config_.method, ledger);
    cache_.eval.dofs = cache_.solve->solution();
    fill_fluxes(mesh_, config_, target_triangles_, &cache_.eval);
  }
  return cache_;
}

const FieldProblem::SolveCache& AffineFieldProblem::jacobian(const Vector& p,
                                                             SolveLedger* ledger) const {
  (void)solved(p, ledger);
  if (!cache_.has_jacobian) {
    const Matrix& nodes = cache_.eval.nodes;
    const Vector& dofs = cache_.eval.dofs;
    const int n = decomposition_.num_params();
    const int targets = static_cast<int>(target_triangles_.size());
    cache_.jac_x.resize(targets, n);
    cache_.jac_y.resize(targets, n);
    for (int i = 0; i < n; ++i) {
      const AssembledSystem deriv = decomposition_derivative(decomposition_, p, i);
      const Vector s = solve_sensitivity(*cache_.solve, deriv, dofs);
      const Matrix velocities = affine_node_velocities(mesh_, decomposition_, i);
      for (int k = 0; k < targets; ++k) {
        const Eigen::Vector3i tri = mesh_.triangles.row(target_triangles_[k]).transpose();
        const Vector2 db =
            flux_parameter_derivative(nodes, velocities, tri, dofs, s, config_.length);
        cache_.jac_x(k, i) = db.x();
        cache_.jac_y(k, i) = db.y();
      }
    }
    cache_.has_jacobian = true;
  }
  return cache_;
}

OptimizationProblem make_optimization(std::shared_ptr<const FieldProblem> problem, BoxBounds box,
                                      Vector initial, SolveLedger* ledger) {
  if (initial.size() != problem->num_params() || box.dim() != problem->num_params()) {
    throw std::invalid_argument("optimization box/initial size does not match the problem");
  }
  OptimizationProblem out;
  out.objective = [problem, ledger](const Vector& p) { return problem->objective(p, ledger); };
  out.gradient = [problem, ledger](const Vector& p) { return problem->gradient(p, ledger); };
  out.initial_hessian = [problem, ledger](const Vector& p) {
    return problem->gauss_newton(p, ledger);
  };
  out.constraints = ConstraintSet::box_only(std::move(box));
  out.initial = std::move(initial);
  out.ledger = ledger;
  return out;
}

}  // namespace magshape
