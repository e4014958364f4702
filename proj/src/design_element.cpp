#include "magshape/design_element.hpp"

#include <algorithm>
#include <cmath>

namespace magshape {

Vector2 ElementFrame::map(double xh, double yh) const {
  return yh * eval_curve(c1.curve, xh) + (1.0 - yh) * eval_curve(c0.curve, xh);
}

Matrix2 ElementFrame::jacobian(double xh, double yh) const {
  Vector2 p0, p1, d0, d1;
  c0.eval_all(xh, &p0, &d0, nullptr, nullptr);
  c1.eval_all(xh, &p1, &d1, nullptr, nullptr);
  Matrix2 jac;
  jac.col(0) = yh * d1 + (1.0 - yh) * d0;
  jac.col(1) = p1 - p0;
  return jac;
}

Vector2 ElementFrame::map_param_derivative(double xh, double yh, int param) const {
  return yh * c1.point_param_derivative(xh, param) +
         (1.0 - yh) * c0.point_param_derivative(xh, param);
}

void ElementFrame::eval_all(double xh, double yh, Vector2* point, Matrix2* jac,
                            std::vector<Vector2>* d_point, std::vector<Matrix2>* d_jac) const {
  Vector2 p0, p1, t0, t1;
  std::vector<Vector2> dp0, dp1, dt0, dt1;
  const bool want_params = d_point != nullptr || d_jac != nullptr;
  c0.eval_all(xh, &p0, &t0, want_params ? &dp0 : nullptr, want_params ? &dt0 : nullptr);
  c1.eval_all(xh, &p1, &t1, want_params ? &dp1 : nullptr, want_params ? &dt1 : nullptr);
  if (point) *point = yh * p1 + (1.0 - yh) * p0;
  if (jac) {
    jac->col(0) = yh * t1 + (1.0 - yh) * t0;
    jac->col(1) = p1 - p0;
  }
  if (!want_params) return;
  const int np = c0.num_params();
  if (d_point) d_point->assign(np, Vector2::Zero());
  if (d_jac) d_jac->assign(np, Matrix2::Zero());
  for (int i = 0; i < np; ++i) {
    if (d_point) (*d_point)[i] = yh * dp1[i] + (1.0 - yh) * dp0[i];
    if (d_jac) {
      (*d_jac)[i].col(0) = yh * dt1[i] + (1.0 - yh) * dt0[i];
      (*d_jac)[i].col(1) = dp1[i] - dp0[i];
    }
  }
}

double ElementFrame::diameter() const {
  Matrix all(c0.curve.control.rows() + c1.curve.control.rows(), 2);
  all << c0.curve.control, c1.curve.control;
  const Vector2 lo = all.colwise().minCoeff();
  const Vector2 hi = all.colwise().maxCoeff();
  return (hi - lo).norm();
}

ElementFrame realize_element(const DesignElement& e, const Vector& p, int num_params) {
  return {realize(e.curve0, p, num_params), realize(e.curve1, p, num_params)};
}

namespace {

Vector2 clamp_unit(const Vector2& uv) {
  return {std::clamp(uv.x(), 0.0, 1.0), std::clamp(uv.y(), 0.0, 1.0)};
}

// One damped, clamped Newton run from uv0. Returns true on residual convergence.
bool newton_from(const ElementFrame& frame, const Vector2& x, Vector2 uv, double tol_abs,
                 const InvertSettings& s, Vector2* out) {
  Vector2 r = frame.map(uv.x(), uv.y()) - x;
  for (int it = 0; it < s.max_iterations; ++it) {
    if (r.norm() <= tol_abs) {
      *out = uv;
      return true;
    }
    const Matrix2 jac = frame.jacobian(uv.x(), uv.y());
    const Vector2 step = jac.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) return false;
    double scale = 1.0;
    bool moved = false;
    for (int h = 0; h <= s.max_halvings; ++h, scale *= 0.5) {
      const Vector2 trial = clamp_unit(uv + scale * step);
      const Vector2 rt = frame.map(trial.x(), trial.y()) - x;
      if (rt.norm() < r.norm()) {
        uv = trial;
        r = rt;
        moved = true;
        break;
      }
    }
    if (!moved) return r.norm() <= tol_abs && (*out = uv, true);
  }
  if (r.norm() <= tol_abs) {
    *out = uv;
    return true;
  }
  return false;
}

}  // namespace

bool invert_element(const ElementFrame& frame, const Vector2& x, Vector2* uv,
                    const InvertSettings& settings) {
  const double tol_abs = settings.residual_rel * std::max(frame.diameter(), 1e-300);
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int a = 0; a < settings.grid; ++a) {
    for (int b = 0; b < settings.grid; ++b) {
      const Vector2 start((a + 0.5) / settings.grid, (b + 0.5) / settings.grid);
      Vector2 candidate;
      if (newton_from(frame, x, start, tol_abs, settings, &candidate)) {
        const double res = (frame.map(candidate.x(), candidate.y()) - x).norm();
        if (res < best) {
          best = res;
          *uv = candidate;
          found = true;
        }
      }
    }
  }
  return found;
}

DeformableMesh bind_elements(const TriMesh& mesh, std::vector<DesignElement> elements,
                             const Vector& reference_design, const BindSettings& settings) {
  DeformableMesh dm;
  dm.reference = mesh;
  dm.elements = std::move(elements);
  dm.num_params = static_cast<int>(reference_design.size());
  dm.reference_design = reference_design;
  dm.node_element = Eigen::VectorXi::Constant(mesh.num_nodes(), -1);
  dm.node_uv = Matrix::Zero(mesh.num_nodes(), 2);

  std::vector<ElementFrame> frames;
  frames.reserve(dm.elements.size());
  for (const auto& e : dm.elements) frames.push_back(realize_element(e, reference_design, dm.num_params));

  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const Vector2 x = mesh.nodes.row(n).transpose();
    for (size_t e = 0; e < frames.size(); ++e) {
      const ElementFrame& frame = frames[e];
      Vector2 uv;
      if (!invert_element(frame, x, &uv, settings.invert)) continue;
      const double t = settings.inside_tol;
      if (uv.x() < -t || uv.x() > 1.0 + t || uv.y() < -t || uv.y() > 1.0 + t) continue;
      const double diam = frame.diameter();
      // Orientation of the chart is immaterial (a reflected patch still moves
      // its nodes consistently); only a collapsing Jacobian disqualifies.
      const double det = frame.jacobian(uv.x(), uv.y()).determinant();
      if (!(std::abs(det) > settings.det_rel_tol * diam * diam)) continue;  // degenerate: leave fixed
      dm.node_element[n] = static_cast<int>(e);
      dm.node_uv.row(n) = clamp_unit(uv).transpose();
      break;
    }
  }
  return dm;
}

namespace {

std::vector<ElementFrame> frames_at(const DeformableMesh& dm, const Vector& p) {
  if (p.size() != dm.num_params)
    throw std::invalid_argument("DeformableMesh: design vector has wrong dimension");
  std::vector<ElementFrame> frames;
  frames.reserve(dm.elements.size());
  for (const auto& e : dm.elements) frames.push_back(realize_element(e, p, dm.num_params));
  return frames;
}

void check_areas(const DeformableMesh& dm, const Matrix& nodes) {
  for (int t = 0; t < dm.reference.num_triangles(); ++t) {
    const double area = signed_area(nodes, dm.reference.triangles.row(t).transpose());
    if (!(area > 0.0))
      throw InvalidGeometry("deformed mesh has a nonpositive triangle area (triangle " +
                            std::to_string(t) + ")");
  }
}

}  // namespace

Matrix deformed_nodes(const DeformableMesh& dm, const Vector& p) {
  const std::vector<ElementFrame> frames = frames_at(dm, p);
  Matrix nodes = dm.reference.nodes;
  for (int n = 0; n < dm.reference.num_nodes(); ++n) {
    const int e = dm.node_element[n];
    if (e < 0) continue;
    nodes.row(n) = frames[e].map(dm.node_uv(n, 0), dm.node_uv(n, 1)).transpose();
  }
  check_areas(dm, nodes);
  return nodes;
}

Matrix node_velocities(const DeformableMesh& dm, const Vector& p, int param) {
  const std::vector<ElementFrame> frames = frames_at(dm, p);
  Matrix vel = Matrix::Zero(dm.reference.num_nodes(), 2);
  for (int n = 0; n < dm.reference.num_nodes(); ++n) {
    const int e = dm.node_element[n];
    if (e < 0) continue;
    vel.row(n) = frames[e].map_param_derivative(dm.node_uv(n, 0), dm.node_uv(n, 1), param).transpose();
  }
  return vel;
}

void deform_with_velocities(const DeformableMesh& dm, const Vector& p, Matrix* nodes,
                            std::vector<Matrix>* velocities) {
  const std::vector<ElementFrame> frames = frames_at(dm, p);
  Matrix out = dm.reference.nodes;
  std::vector<Matrix> vel(dm.num_params, Matrix::Zero(dm.reference.num_nodes(), 2));
  std::vector<Vector2> d_point;
  for (int n = 0; n < dm.reference.num_nodes(); ++n) {
    const int e = dm.node_element[n];
    if (e < 0) continue;
    Vector2 point;
    frames[e].eval_all(dm.node_uv(n, 0), dm.node_uv(n, 1), &point, nullptr, &d_point, nullptr);
    out.row(n) = point.transpose();
    for (int i = 0; i < dm.num_params; ++i) vel[i].row(n) = d_point[i].transpose();
  }
  check_areas(dm, out);
  if (nodes) *nodes = std::move(out);
  if (velocities) *velocities = std::move(vel);
}

}  // namespace magshape
