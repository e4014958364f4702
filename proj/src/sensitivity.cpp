#include "magshape/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace magshape {

namespace {

// Velocity-induced rates of the triangle coefficients b, c and the area.
struct GeometryRates {
  Eigen::Vector3d db, dc;
  double darea;
};

GeometryRates geometry_rates(const Matrix& nodes, const Matrix& velocities,
                             const Eigen::Vector3i& tri, const TriangleGeometry& g) {
  GeometryRates r;
  const auto vx = [&](int k) { return velocities(tri[k], 0); };
  const auto vy = [&](int k) { return velocities(tri[k], 1); };
  r.db << vy(1) - vy(2), vy(2) - vy(0), vy(0) - vy(1);
  r.dc << vx(2) - vx(1), vx(0) - vx(2), vx(1) - vx(0);
  r.darea = 0.0;
  for (int k = 0; k < 3; ++k)
    r.darea += 0.5 * (vx(k) * g.b[k] + nodes(tri[k], 0) * r.db[k]);
  return r;
}

}  // namespace

AssembledSystem assembly_derivative(const TriMesh& mesh, const Matrix& nodes,
                                    const Matrix& velocities, const RegionMap& regions,
                                    double length, const Pattern& pattern) {
  if (velocities.rows() != nodes.rows() || velocities.cols() != 2)
    throw std::invalid_argument("assembly_derivative: velocity table size mismatch");
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
      throw std::invalid_argument("assembly_derivative: nonpositive triangle area");
    const Material& mat = regions.at(mesh.region_tags[mesh.triangle_region[t]]);
    const GeometryRates r = geometry_rates(nodes, velocities, tri.transpose(), g);

    const Eigen::Matrix3d quad = g.b * g.b.transpose() + g.c * g.c.transpose();
    const Eigen::Matrix3d dquad = r.db * g.b.transpose() + g.b * r.db.transpose() +
                                  r.dc * g.c.transpose() + g.c * r.dc.transpose();
    const Eigen::Matrix3d dk_e =
        (mat.nu / length) * (dquad / (4.0 * g.area) - quad * r.darea / (4.0 * g.area * g.area));
    scatter_element(pattern, t, dk_e, &sys.stiffness);

    if (mat.sigma != 0.0) {
      Eigen::Matrix3d m_e = Eigen::Matrix3d::Constant(1.0);
      m_e.diagonal().setConstant(2.0);
      m_e *= (mat.sigma / length) * r.darea / 12.0;
      scatter_element(pattern, t, m_e, &sys.mass);
    }
    for (int i = 0; i < 3; ++i) {
      if (mat.j_src != 0.0) sys.load_source[tri[i]] += mat.j_src * r.darea / 3.0;
      if (!mat.h_m.isZero(0.0))
        sys.load_magnet[tri[i]] += -0.5 * (mat.h_m.x() * r.dc[i] - mat.h_m.y() * r.db[i]);
    }
  }
  return sys;
}

Vector solve_sensitivity(const FieldSolve& solve, const AssembledSystem& derivative,
                         const Vector& dofs) {
  const Vector rhs = derivative.rhs() - derivative.stiffness * dofs;
  return solve.backsolve(rhs);
}

Vector2 flux_density_shape_derivative(const Matrix& nodes, const Matrix& velocities,
                                      const Eigen::Vector3i& tri, const Vector& dofs,
                                      double length) {
  const TriangleGeometry g = triangle_geometry(nodes, tri);
  const GeometryRates r = geometry_rates(nodes, velocities, tri, g);
  Vector2 flux = Vector2::Zero(), dflux = Vector2::Zero();
  for (int i = 0; i < 3; ++i) {
    const double a_i = dofs[tri[i]];
    flux += a_i * Vector2(g.c[i], -g.b[i]);
    dflux += a_i * Vector2(r.dc[i], -r.db[i]);
  }
  const double denom = 2.0 * g.area * length;
  return dflux / denom - flux * r.darea / (denom * g.area);
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& p, double rel_step,
                   bool central) {
  Vector grad(p.size());
  const double f0 = central ? 0.0 : f(p);
  for (int i = 0; i < p.size(); ++i) {
    const double h = rel_step * std::max(std::abs(p[i]), 1.0);
    Vector q = p;
    q[i] = p[i] + h;
    const double fp = f(q);
    if (central) {
      q[i] = p[i] - h;
      grad[i] = (fp - f(q)) / (2.0 * h);
    } else {
      grad[i] = (fp - f0) / h;
    }
  }
  return grad;
}

}  // namespace magshape
