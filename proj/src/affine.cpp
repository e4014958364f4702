#include "magshape/affine.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace magshape {

ThetaValues theta_values(const Matrix2& A, const Vector2& h_m) {
  const double a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
  const double det = a * d - b * c;
  if (!(det > 0.0)) throw InvalidGeometry("affine map has nonpositive determinant");
  ThetaValues t;
  t.det = det;
  t.kxx = (b * b + d * d) / det;
  t.kyy = (a * a + c * c) / det;
  t.kxy = -(a * b + c * d) / det;
  t.kyx = t.kxy;
  t.jmx = -(b * h_m.x() + d * h_m.y());
  t.jmy = a * h_m.x() + c * h_m.y();
  return t;
}

ThetaValues theta_derivative(const Matrix2& A, const Matrix2& dA, const Vector2& h_m) {
  const double a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
  const double da = dA(0, 0), db = dA(0, 1), dc = dA(1, 0), dd = dA(1, 1);
  const double det = a * d - b * c;
  if (!(det > 0.0)) throw InvalidGeometry("affine map has nonpositive determinant");
  const double ddet = da * d + a * dd - db * c - b * dc;
  ThetaValues t;
  t.det = ddet;
  t.kxx = 2.0 * (b * db + d * dd) / det - (b * b + d * d) * ddet / (det * det);
  t.kyy = 2.0 * (a * da + c * dc) / det - (a * a + c * c) * ddet / (det * det);
  t.kxy = -(da * b + a * db + dc * d + c * dd) / det + (a * b + c * d) * ddet / (det * det);
  t.kyx = t.kxy;
  t.jmx = -(db * h_m.x() + dd * h_m.y());
  t.jmy = da * h_m.x() + dc * h_m.y();
  return t;
}

namespace {

Eigen::Matrix<double, 2, 3> vertices_at(const AffineSubdomain& s, const Vector& p) {
  Eigen::Matrix<double, 2, 3> v;
  for (int k = 0; k < 3; ++k) {
    v(0, k) = s.vertices[k][0](p);
    v(1, k) = s.vertices[k][1](p);
  }
  return v;
}

Eigen::Matrix<double, 2, 3> vertex_derivatives(const AffineSubdomain& s, int param) {
  Eigen::Matrix<double, 2, 3> v;
  for (int k = 0; k < 3; ++k) {
    v(0, k) = s.vertices[k][0].deriv(param);
    v(1, k) = s.vertices[k][1].deriv(param);
  }
  return v;
}

Matrix2 edge_matrix(const Eigen::Matrix<double, 2, 3>& v) {
  Matrix2 e;
  e.col(0) = v.col(1) - v.col(0);
  e.col(1) = v.col(2) - v.col(0);
  return e;
}

AffineMap map_from_vertices(const Eigen::Matrix<double, 2, 3>& cur,
                            const Eigen::Matrix<double, 2, 3>& ref, const Matrix2& ref_inv) {
  AffineMap m;
  m.A = edge_matrix(cur) * ref_inv;
  m.shift = cur.col(0) - m.A * ref.col(0);
  return m;
}

// Velocity field of one subdomain for one parameter: x -> dA x + dshift.
AffineMap velocity_map(const SubdomainFactors& f, const AffineSubdomain& s, int param) {
  const Eigen::Matrix<double, 2, 3> dv = vertex_derivatives(s, param);
  AffineMap m;
  m.A = edge_matrix(dv) * f.ref_edges_inv;
  m.shift = dv.col(0) - m.A * f.ref_vertices.col(0);
  return m;
}

void add_scaled(const SparseMat& source, double weight, SparseMat* target) {
  if (weight == 0.0) return;
  Eigen::Map<Vector>(target->valuePtr(), target->nonZeros()) +=
      weight * Eigen::Map<const Vector>(source.valuePtr(), source.nonZeros());
}

}  // namespace

AffineDecomposition build_decomposition(const TriMesh& mesh, const RegionMap& regions,
                                        std::vector<AffineSubdomain> subdomains,
                                        const Vector& reference_design, double length,
                                        const Pattern& pattern) {
  if (!(length > 0.0)) throw std::invalid_argument("build_decomposition: length must be positive");
  AffineDecomposition d;
  d.pattern = pattern;
  d.length = length;
  d.reference_design = reference_design;
  d.subdomains = std::move(subdomains);

  std::vector<int> owner(mesh.num_triangles(), -1);
  for (size_t s = 0; s < d.subdomains.size(); ++s) {
    for (int t : d.subdomains[s].triangles) {
      if (t < 0 || t >= mesh.num_triangles())
        throw std::invalid_argument("build_decomposition: triangle index out of range");
      if (owner[t] != -1)
        throw std::invalid_argument("build_decomposition: triangle assigned to two subdomains");
      owner[t] = static_cast<int>(s);
    }
  }

  d.stiffness0 = pattern.zero_matrix();
  d.mass0 = pattern.zero_matrix();
  d.load_source0 = Vector::Zero(mesh.num_nodes());
  d.load_magnet0 = Vector::Zero(mesh.num_nodes());
  d.factors.resize(d.subdomains.size());
  for (size_t s = 0; s < d.factors.size(); ++s) {
    SubdomainFactors& f = d.factors[s];
    f.kxx = pattern.zero_matrix();
    f.kyy = pattern.zero_matrix();
    f.kxy = pattern.zero_matrix();
    f.kyx = pattern.zero_matrix();
    f.mass = pattern.zero_matrix();
    f.load_source = Vector::Zero(mesh.num_nodes());
    f.load_mx = Vector::Zero(mesh.num_nodes());
    f.load_my = Vector::Zero(mesh.num_nodes());
    f.ref_vertices = vertices_at(d.subdomains[s], reference_design);
    const Matrix2 e = edge_matrix(f.ref_vertices);
    const double det = e.determinant();
    if (!(std::abs(det) > 1e-30))
      throw std::invalid_argument("build_decomposition: degenerate reference vertices");
    Matrix2 inv;
    inv << e(1, 1), -e(0, 1), -e(1, 0), e(0, 0);
    f.ref_edges_inv = inv / det;
  }

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    const TriangleGeometry g = triangle_geometry(mesh, t);
    if (!(g.area > 0.0)) throw std::invalid_argument("build_decomposition: nonpositive triangle area");
    const Material& mat = regions.at(mesh.region_tags[mesh.triangle_region[t]]);
    const int s = owner[t];
    if (s < 0) {
      const Eigen::Matrix3d k_e =
          (mat.nu / length) * (g.b * g.b.transpose() + g.c * g.c.transpose()) / (4.0 * g.area);
      scatter_element(pattern, t, k_e, &d.stiffness0);
      if (mat.sigma != 0.0) {
        Eigen::Matrix3d m_e = Eigen::Matrix3d::Constant(1.0);
        m_e.diagonal().setConstant(2.0);
        m_e *= (mat.sigma / length) * g.area / 12.0;
        scatter_element(pattern, t, m_e, &d.mass0);
      }
      for (int i = 0; i < 3; ++i) {
        if (mat.j_src != 0.0) d.load_source0[tri[i]] += mat.j_src * g.area / 3.0;
        if (!mat.h_m.isZero(0.0))
          d.load_magnet0[tri[i]] += -0.5 * (mat.h_m.x() * g.c[i] - mat.h_m.y() * g.b[i]);
      }
      continue;
    }

    SubdomainFactors& f = d.factors[s];
    const double scale = mat.nu / (length * 4.0 * g.area);
    scatter_element(pattern, t, scale * (g.b * g.b.transpose()).eval(), &f.kxx);
    scatter_element(pattern, t, scale * (g.c * g.c.transpose()).eval(), &f.kyy);
    scatter_element(pattern, t, scale * (g.b * g.c.transpose()).eval(), &f.kxy);
    scatter_element(pattern, t, scale * (g.c * g.b.transpose()).eval(), &f.kyx);
    if (mat.sigma != 0.0) {
      Eigen::Matrix3d m_e = Eigen::Matrix3d::Constant(1.0);
      m_e.diagonal().setConstant(2.0);
      m_e *= (mat.sigma / length) * g.area / 12.0;
      scatter_element(pattern, t, m_e, &f.mass);
    }
    for (int i = 0; i < 3; ++i) {
      if (mat.j_src != 0.0) f.load_source[tri[i]] += mat.j_src * g.area / 3.0;
      if (!mat.h_m.isZero(0.0)) {
        f.load_mx[tri[i]] += -0.5 * g.b[i];
        f.load_my[tri[i]] += -0.5 * g.c[i];
      }
    }
    if (!mat.h_m.isZero(0.0)) {
      if (f.h_m.isZero(0.0))
        f.h_m = mat.h_m;
      else if ((f.h_m - mat.h_m).norm() > 0.0)
        throw std::invalid_argument(
            "build_decomposition: magnetization must be uniform within a subdomain");
    }
  }

  // Interface consistency: the motion of a node shared between subdomains (or
  // with the undecomposed rest of the mesh) must be unambiguous. Velocities
  // are constant in p, so checking them covers every design.
  const int np = d.num_params();
  std::unordered_map<int, std::pair<int, Vector2>> seen;  // node -> (subdomain, velocity)
  std::vector<bool> in_fixed(mesh.num_nodes(), false);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (owner[t] < 0)
      for (int k = 0; k < 3; ++k) in_fixed[mesh.triangles(t, k)] = true;

  const double scale = (mesh.nodes.colwise().maxCoeff() - mesh.nodes.colwise().minCoeff()).norm();
  const double tol = 1e-9 * std::max(scale, 1e-30);
  for (int i = 0; i < np; ++i) {
    seen.clear();
    for (size_t s = 0; s < d.subdomains.size(); ++s) {
      const AffineMap vel = velocity_map(d.factors[s], d.subdomains[s], i);
      for (int t : d.subdomains[s].triangles) {
        for (int k = 0; k < 3; ++k) {
          const int node = mesh.triangles(t, k);
          const Vector2 v = vel(mesh.nodes.row(node).transpose());
          if (in_fixed[node] && v.norm() > tol)
            throw std::invalid_argument(
                "build_decomposition: node on the fixed-region interface would move");
          auto [it, inserted] = seen.try_emplace(node, static_cast<int>(s), v);
          if (!inserted && it->second.first != static_cast<int>(s) &&
              (it->second.second - v).norm() > tol)
            throw std::invalid_argument(
                "build_decomposition: subdomains disagree on a shared node's motion");
        }
      }
    }
  }
  return d;
}

AffineMap subdomain_map(const AffineDecomposition& d, int sub, const Vector& p) {
  const SubdomainFactors& f = d.factors.at(sub);
  return map_from_vertices(vertices_at(d.subdomains[sub], p), f.ref_vertices, f.ref_edges_inv);
}

AffineMap subdomain_map_derivative(const AffineDecomposition& d, int sub, int param) {
  return velocity_map(d.factors.at(sub), d.subdomains.at(sub), param);
}

AssembledSystem assemble_from_decomposition(const AffineDecomposition& d, const Vector& p) {
  AssembledSystem sys;
  sys.length = d.length;
  sys.stiffness = d.stiffness0;
  sys.mass = d.mass0;
  sys.load_source = d.load_source0;
  sys.load_magnet = d.load_magnet0;
  for (size_t s = 0; s < d.subdomains.size(); ++s) {
    const SubdomainFactors& f = d.factors[s];
    const AffineMap m = subdomain_map(d, static_cast<int>(s), p);
    const ThetaValues t = theta_values(m.A, f.h_m);
    add_scaled(f.kxx, t.kxx, &sys.stiffness);
    add_scaled(f.kyy, t.kyy, &sys.stiffness);
    add_scaled(f.kxy, t.kxy, &sys.stiffness);
    add_scaled(f.kyx, t.kyx, &sys.stiffness);
    add_scaled(f.mass, t.det, &sys.mass);
    sys.load_source += t.det * f.load_source;
    sys.load_magnet += t.jmx * f.load_mx + t.jmy * f.load_my;
  }
  return sys;
}

AssembledSystem decomposition_derivative(const AffineDecomposition& d, const Vector& p, int param) {
  AssembledSystem sys;
  sys.length = d.length;
  sys.stiffness = d.pattern.zero_matrix();
  sys.mass = d.pattern.zero_matrix();
  sys.load_source = Vector::Zero(d.load_source0.size());
  sys.load_magnet = Vector::Zero(d.load_magnet0.size());
  for (size_t s = 0; s < d.subdomains.size(); ++s) {
    const SubdomainFactors& f = d.factors[s];
    const AffineMap m = subdomain_map(d, static_cast<int>(s), p);
    const AffineMap dm = subdomain_map_derivative(d, static_cast<int>(s), param);
    const ThetaValues t = theta_derivative(m.A, dm.A, f.h_m);
    add_scaled(f.kxx, t.kxx, &sys.stiffness);
    add_scaled(f.kyy, t.kyy, &sys.stiffness);
    add_scaled(f.kxy, t.kxy, &sys.stiffness);
    add_scaled(f.kyx, t.kyx, &sys.stiffness);
    add_scaled(f.mass, t.det, &sys.mass);
    sys.load_source += t.det * f.load_source;
    sys.load_magnet += t.jmx * f.load_mx + t.jmy * f.load_my;
  }
  return sys;
}

Matrix affine_deformed_nodes(const TriMesh& mesh, const AffineDecomposition& d, const Vector& p) {
  Matrix nodes = mesh.nodes;
  const double scale = (mesh.nodes.colwise().maxCoeff() - mesh.nodes.colwise().minCoeff()).norm();
  const double tol = 1e-9 * std::max(scale, 1e-30);
  std::vector<char> moved(mesh.num_nodes(), 0);
  for (size_t s = 0; s < d.subdomains.size(); ++s) {
    const AffineMap m = subdomain_map(d, static_cast<int>(s), p);
    if (!(m.A.determinant() > 0.0)) throw InvalidGeometry("affine map has nonpositive determinant");
    for (int t : d.subdomains[s].triangles) {
      for (int k = 0; k < 3; ++k) {
        const int node = mesh.triangles(t, k);
        const Vector2 x = m(mesh.nodes.row(node).transpose());
        if (moved[node] && (nodes.row(node).transpose() - x).norm() > tol)
          throw std::logic_error("affine_deformed_nodes: inconsistent node motion");
        nodes.row(node) = x.transpose();
        moved[node] = 1;
      }
    }
  }
  return nodes;
}

Matrix affine_node_velocities(const TriMesh& mesh, const AffineDecomposition& d, int param) {
  Matrix vel = Matrix::Zero(mesh.num_nodes(), 2);
  for (size_t s = 0; s < d.subdomains.size(); ++s) {
    const AffineMap m = subdomain_map_derivative(d, static_cast<int>(s), param);
    for (int t : d.subdomains[s].triangles)
      for (int k = 0; k < 3; ++k) {
        const int node = mesh.triangles(t, k);
        vel.row(node) = m(mesh.nodes.row(node).transpose()).transpose();
      }
  }
  return vel;
}

}  // namespace magshape
