#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "magshape/ledger.hpp"
#include "magshape/mesh.hpp"
#include "magshape/types.hpp"

namespace magshape {

/// Shared sparsity structure for all matrices assembled on one mesh topology:
/// the CSC skeleton plus, per triangle, the value-array slot of each of its
/// nine local entries. Assembling into slots is deterministic and keeps every
/// factor of a decomposition on the identical pattern.
struct Pattern {
  SparseMat skeleton;          // compressed, values zero
  Eigen::MatrixXi tri_slots;   // triangles x 9, column-major local (i + 3j)

  [[nodiscard]] SparseMat zero_matrix() const { return skeleton; }
};

[[nodiscard]] Pattern build_pattern(const TriMesh& mesh);

/// Add one element matrix (3x3, local) into the value array of a matrix that
/// shares the pattern's skeleton.
void scatter_element(const Pattern& pattern, int triangle, const Eigen::Matrix3d& element,
                     SparseMat* target);

/// Full-size system: stiffness, conductivity mass, source and magnet loads.
/// Degrees of freedom are line-integrated vector potentials (Wb).
struct AssembledSystem {
  SparseMat stiffness;   // K
  SparseMat mass;        // M_sigma
  Vector load_source;    // from impressed current density
  Vector load_magnet;    // from permanent magnetization
  double length = 1.0;   // out-of-plane length l_z (m)

  [[nodiscard]] Vector rhs() const { return load_source + load_magnet; }
};

/// Direct assembly on the given node coordinates (topology from `mesh`).
[[nodiscard]] AssembledSystem assemble_system(const TriMesh& mesh, const Matrix& nodes,
                                              const RegionMap& regions, double length,
                                              const Pattern& pattern);

/// Linear Dirichlet data per boundary label: A_z = c0 + cx*x + cy*y (T*m).
struct BoundaryValue {
  double c0 = 0.0, cx = 0.0, cy = 0.0;
  [[nodiscard]] double operator()(const Vector2& x) const { return c0 + cx * x.x() + cy * x.y(); }
};

using DirichletSpec = std::unordered_map<std::string, BoundaryValue>;

/// System after symmetric elimination of Dirichlet dofs.
struct ConstrainedSystem {
  int num_dofs = 0;                 // full size
  std::vector<int> free_dofs;       // ascending
  Eigen::VectorXi full_to_free;     // -1 on constrained dofs
  Vector prescribed;                // full size; fixed dof values, zero elsewhere
  SparseMat matrix_ff;              // K restricted to free dofs
  Vector rhs_f;                     // (rhs - K * prescribed) on free dofs

  [[nodiscard]] Vector restrict_free(const Vector& full) const;
  [[nodiscard]] Vector scatter_free(const Vector& free_values) const;  // zeros on constrained
};

/// Builds the reduced system. Dirichlet values are sampled from the node
/// coordinates used for assembly; dofs scale with `length`.
[[nodiscard]] ConstrainedSystem apply_dirichlet(const AssembledSystem& system, const TriMesh& mesh,
                                                const Matrix& nodes, const DirichletSpec& bc);

enum class SolveMethod { Direct, ConjugateGradient };

/// Factorized field solve. Construction performs one full solve (counted as
/// fe_solves); additional right-hand sides reuse the factorization and count
/// as fe_backsolves.
class FieldSolve {
 public:
  FieldSolve(const ConstrainedSystem& system, SolveMethod method = SolveMethod::Direct,
             SolveLedger* ledger = nullptr);

  /// Full dof vector with prescribed values on Dirichlet dofs.
  [[nodiscard]] const Vector& solution() const { return solution_; }

  /// Solve K_ff x_f = rhs restricted to free dofs; returns a full-size vector
  /// with zeros on Dirichlet dofs (homogeneous sensitivity convention).
  [[nodiscard]] Vector backsolve(const Vector& rhs_full) const;

  [[nodiscard]] const ConstrainedSystem& system() const { return system_; }

 private:
  [[nodiscard]] Vector solve_free(const Vector& rhs_f) const;

  ConstrainedSystem system_;
  SolveMethod method_;
  SolveLedger* ledger_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMat>> direct_;
  std::unique_ptr<Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper>> cg_;
  Vector solution_;
};

/// Assemble, constrain and solve in one call.
[[nodiscard]] Vector solve_field(const TriMesh& mesh, const Matrix& nodes, const RegionMap& regions,
                                 double length, const DirichletSpec& bc, const Pattern& pattern,
                                 SolveMethod method = SolveMethod::Direct,
                                 SolveLedger* ledger = nullptr);

/// Piecewise-constant flux density in one triangle from the dof vector.
[[nodiscard]] Vector2 flux_density(const Matrix& nodes, const Eigen::Vector3i& tri, const Vector& dofs,
                                   double length);

/// Magnetic coenergy-style quadratic form 0.5 a^T K a (J).
[[nodiscard]] double field_energy(const AssembledSystem& system, const Vector& dofs);

}  // namespace magshape
