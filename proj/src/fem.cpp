#include "magshape/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace magshape {

Pattern build_pattern(const TriMesh& mesh) {
  std::vector<Triplet> entries;
  entries.reserve(static_cast<size_t>(mesh.num_triangles()) * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) entries.emplace_back(tri[i], tri[j], 0.0);
  }
  Pattern pattern;
  pattern.skeleton.resize(mesh.num_nodes(), mesh.num_nodes());
  pattern.skeleton.setFromTriplets(entries.begin(), entries.end());
  pattern.skeleton.makeCompressed();

  const int* outer = pattern.skeleton.outerIndexPtr();
  const int* inner = pattern.skeleton.innerIndexPtr();
  auto slot_of = [&](int row, int col) {
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) throw std::logic_error("build_pattern: missing slot");
    return static_cast<int>(it - inner);
  };
  pattern.tri_slots.resize(mesh.num_triangles(), 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) pattern.tri_slots(t, i + 3 * j) = slot_of(tri[i], tri[j]);
  }
  return pattern;
}

void scatter_element(const Pattern& pattern, int triangle, const Eigen::Matrix3d& element,
                     SparseMat* target) {
  double* values = target->valuePtr();
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) values[pattern.tri_slots(triangle, i + 3 * j)] += element(i, j);
}

AssembledSystem assemble_system(const TriMesh& mesh, const Matrix& nodes, const RegionMap& regions,
                                double length, const Pattern& pattern) {
  if (!(length > 0.0)) throw std::invalid_argument("assemble_system: length must be positive");
  if (nodes.rows() != mesh.nodes.rows())
    throw std::invalid_argument("assemble_system: node table size mismatch");
  AssembledSystem sys;
  sys.length = length;
  sys.stiffness = pattern.zero_matrix();
  sys.mass = pattern.zero_matrix();
  sys.load_source = Vector::Zero(mesh.num_nodes());
  sys.load_magnet = Vector::Zero(mesh.num_nodes());

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    const TriangleGeometry g = triangle_geometry(nodes, tri);
    if (!(g.area > 0.0))
      throw std::invalid_argument("assemble_system: nonpositive triangle area (triangle " +
                                  std::to_string(t) + ")");
    const Material& mat = regions.at(mesh.region_tags[mesh.triangle_region[t]]);

    const Eigen::Matrix3d k_e =
        (mat.nu / length) * (g.b * g.b.transpose() + g.c * g.c.transpose()) / (4.0 * g.area);
    scatter_element(pattern, t, k_e, &sys.stiffness);

    if (mat.sigma != 0.0) {
      Eigen::Matrix3d m_e = Eigen::Matrix3d::Constant(1.0);
      m_e.diagonal().setConstant(2.0);
      m_e *= (mat.sigma / length) * g.area / 12.0;
      scatter_element(pattern, t, m_e, &sys.mass);
    }

    for (int i = 0; i < 3; ++i) {
      if (mat.j_src != 0.0) sys.load_source[tri[i]] += mat.j_src * g.area / 3.0;
      if (!mat.h_m.isZero(0.0))
        sys.load_magnet[tri[i]] += -0.5 * (mat.h_m.x() * g.c[i] - mat.h_m.y() * g.b[i]);
    }
  }
  return sys;
}

Vector ConstrainedSystem::restrict_free(const Vector& full) const {
  Vector out(static_cast<int>(free_dofs.size()));
  for (size_t i = 0; i < free_dofs.size(); ++i) out[static_cast<int>(i)] = full[free_dofs[i]];
  return out;
}

Vector ConstrainedSystem::scatter_free(const Vector& free_values) const {
  Vector out = Vector::Zero(num_dofs);
  for (size_t i = 0; i < free_dofs.size(); ++i) out[free_dofs[i]] = free_values[static_cast<int>(i)];
  return out;
}

ConstrainedSystem apply_dirichlet(const AssembledSystem& system, const TriMesh& mesh,
                                  const Matrix& nodes, const DirichletSpec& bc) {
  const int n = static_cast<int>(system.stiffness.rows());
  ConstrainedSystem cs;
  cs.num_dofs = n;
  cs.prescribed = Vector::Zero(n);
  std::vector<bool> constrained(n, false);

  for (int e = 0; e < mesh.boundary_edges.rows(); ++e) {
    const auto it = bc.find(mesh.boundary_labels[e]);
    if (it == bc.end()) continue;  // label without data stays natural (Neumann)
    for (int k = 0; k < 2; ++k) {
      const int node = mesh.boundary_edges(e, k);
      constrained[node] = true;
      // dof = l_z * A_z so the prescribed potential scales with length
      cs.prescribed[node] = system.length * it->second(nodes.row(node).transpose());
    }
  }

  cs.full_to_free = Eigen::VectorXi::Constant(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!constrained[i]) {
      cs.full_to_free[i] = static_cast<int>(cs.free_dofs.size());
      cs.free_dofs.push_back(i);
    }
  }
  if (cs.free_dofs.empty()) throw std::runtime_error("apply_dirichlet: no free dofs");

  const Vector rhs_full = system.rhs() - system.stiffness * cs.prescribed;
  cs.rhs_f = cs.restrict_free(rhs_full);

  // Reduced matrix via a triplet pass over the stored pattern.
  std::vector<Triplet> entries;
  entries.reserve(static_cast<size_t>(system.stiffness.nonZeros()));
  for (int col = 0; col < system.stiffness.outerSize(); ++col) {
    const int fc = cs.full_to_free[col];
    if (fc < 0) continue;
    for (SparseMat::InnerIterator it(system.stiffness, col); it; ++it) {
      const int fr = cs.full_to_free[static_cast<int>(it.row())];
      if (fr < 0) continue;
      entries.emplace_back(fr, fc, it.value());
    }
  }
  cs.matrix_ff.resize(static_cast<int>(cs.free_dofs.size()), static_cast<int>(cs.free_dofs.size()));
  cs.matrix_ff.setFromTriplets(entries.begin(), entries.end());
  cs.matrix_ff.makeCompressed();
  return cs;
}

FieldSolve::FieldSolve(const ConstrainedSystem& system, SolveMethod method, SolveLedger* ledger)
    : system_(system), method_(method), ledger_(ledger) {
  if (system_.free_dofs.empty()) throw std::runtime_error("FieldSolve: no free dofs (singular system)");
  if (method_ == SolveMethod::Direct) {
    direct_ = std::make_unique<Eigen::SimplicialLDLT<SparseMat>>();
    direct_->compute(system_.matrix_ff);
    if (direct_->info() != Eigen::Success)
      throw std::runtime_error("FieldSolve: direct factorization failed (matrix not SPD?)");
  } else {
    cg_ = std::make_unique<Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper>>();
    cg_->setTolerance(1e-12);
    cg_->compute(system_.matrix_ff);
    if (cg_->info() != Eigen::Success) throw std::runtime_error("FieldSolve: CG setup failed");
  }
  const Vector free_solution = solve_free(system_.rhs_f);
  solution_ = system_.scatter_free(free_solution) + system_.prescribed;
  if (ledger_) ledger_->fe_solves += 1;
}

Vector FieldSolve::solve_free(const Vector& rhs_f) const {
  Vector x;
  if (method_ == SolveMethod::Direct) {
    x = direct_->solve(rhs_f);
    if (direct_->info() != Eigen::Success) throw std::runtime_error("FieldSolve: direct solve failed");
  } else {
    x = cg_->solve(rhs_f);
    if (cg_->info() != Eigen::Success)
      throw std::runtime_error("FieldSolve: CG did not converge to 1e-12");
  }
  if (!x.allFinite()) throw std::runtime_error("FieldSolve: solution is not finite (singular system?)");
  return x;
}

Vector FieldSolve::backsolve(const Vector& rhs_full) const {
  if (ledger_) ledger_->fe_backsolves += 1;
  return system_.scatter_free(solve_free(system_.restrict_free(rhs_full)));
}

Vector solve_field(const TriMesh& mesh, const Matrix& nodes, const RegionMap& regions, double length,
                   const DirichletSpec& bc, const Pattern& pattern, SolveMethod method,
                   SolveLedger* ledger) {
  const AssembledSystem sys = assemble_system(mesh, nodes, regions, length, pattern);
  const ConstrainedSystem cs = apply_dirichlet(sys, mesh, nodes, bc);
  return FieldSolve(cs, method, ledger).solution();
}

Vector2 flux_density(const Matrix& nodes, const Eigen::Vector3i& tri, const Vector& dofs,
                     double length) {
  const TriangleGeometry g = triangle_geometry(nodes, tri);
  Vector2 flux = Vector2::Zero();
  for (int i = 0; i < 3; ++i) {
    const double a_i = dofs[tri[i]];
    flux.x() += a_i * g.c[i];
    flux.y() -= a_i * g.b[i];
  }
  return flux / (2.0 * g.area * length);
}

double field_energy(const AssembledSystem& system, const Vector& dofs) {
  return 0.5 * dofs.dot(system.stiffness * dofs);
}

}  // namespace magshape
