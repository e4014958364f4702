#include "magshape/nurbs.hpp"

#include <cmath>
#include <stdexcept>

namespace magshape {

void NurbsCurve::validate() const {
  if (degree < 0) throw std::invalid_argument("NurbsCurve: negative degree");
  const int n = static_cast<int>(knots.size()) - degree - 1;
  if (n < degree + 1) throw std::invalid_argument("NurbsCurve: too few knots for degree");
  if (control.rows() != n || weights.size() != n)
    throw std::invalid_argument("NurbsCurve: control net inconsistent with knot vector");
  if (control.cols() != 2) throw std::invalid_argument("NurbsCurve: control points must be planar");
  for (int i = 1; i < knots.size(); ++i)
    if (knots[i] < knots[i - 1]) throw std::invalid_argument("NurbsCurve: knots not nondecreasing");
  for (int i = 0; i <= degree; ++i) {
    if (knots[i] != knots[0] || knots[knots.size() - 1 - i] != knots[knots.size() - 1])
      throw std::invalid_argument("NurbsCurve: knot vector not clamped");
  }
  if ((weights.array() <= 0.0).any()) throw std::invalid_argument("NurbsCurve: weights must be positive");
}

int find_span(const Vector& knots, int degree, double u) {
  const int n = static_cast<int>(knots.size()) - degree - 1;
  const double lo = knots[degree], hi = knots[n];
  if (!(u >= lo && u <= hi))
    throw std::out_of_range("find_span: parameter outside knot range");
  if (u >= hi) {
    int s = n - 1;
    while (s > degree && knots[s + 1] <= knots[s]) --s;
    return s;
  }
  int low = degree, high = n;
  int mid = (low + high) / 2;
  while (u < knots[mid] || u >= knots[mid + 1]) {
    if (u < knots[mid])
      high = mid;
    else
      low = mid;
    mid = (low + high) / 2;
  }
  return mid;
}

Eigen::VectorXd eval_basis(const Vector& knots, int degree, double u) {
  const int span = find_span(knots, degree, u);
  Eigen::VectorXd N = Eigen::VectorXd::Zero(degree + 1);
  Eigen::VectorXd left(degree + 1), right(degree + 1);
  N[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
  return N;
}

Matrix eval_basis_derivatives(const Vector& knots, int degree, double u, int order) {
  const int span = find_span(knots, degree, u);
  const int p = degree;
  const int kmax = std::min(order, p);
  Matrix ders = Matrix::Zero(order + 1, p + 1);

  Matrix ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  Matrix a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= kmax; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= kmax; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
    factor *= (p - k);
  }
  return ders;
}

namespace {

// Homogeneous accumulation: V = sum N_k w_k P_k, W = sum N_k w_k over the
// active basis window of `span`.
struct HomoPoint {
  Vector2 v = Vector2::Zero();
  double w = 0.0;
};

HomoPoint accumulate(const NurbsCurve& c, const Eigen::VectorXd& basis_row, int span) {
  HomoPoint h;
  for (int j = 0; j <= c.degree; ++j) {
    const int k = span - c.degree + j;
    const double nw = basis_row[j] * c.weights[k];
    h.v += nw * c.control.row(k).transpose();
    h.w += nw;
  }
  return h;
}

}  // namespace

Vector2 eval_curve(const NurbsCurve& c, double u) {
  const Eigen::VectorXd N = eval_basis(c.knots, c.degree, u);
  const int span = find_span(c.knots, c.degree, u);
  const HomoPoint h = accumulate(c, N, span);
  return h.v / h.w;
}

Vector2 eval_curve_derivative(const NurbsCurve& c, double u) {
  const Matrix ders = eval_basis_derivatives(c.knots, c.degree, u, 1);
  const int span = find_span(c.knots, c.degree, u);
  const HomoPoint h0 = accumulate(c, ders.row(0), span);
  const HomoPoint h1 = accumulate(c, ders.row(1), span);
  const Vector2 point = h0.v / h0.w;
  return (h1.v - point * h1.w) / h0.w;
}

Vector2 CurveJet::point_param_derivative(double u, int param) const {
  Vector2 point, du;
  std::vector<Vector2> dp, dudp;
  eval_all(u, &point, &du, &dp, &dudp);
  return dp.at(param);
}

void CurveJet::eval_all(double u, Vector2* point, Vector2* du, std::vector<Vector2>* dp,
                        std::vector<Vector2>* du_dp) const {
  const NurbsCurve& c = curve;
  const Matrix ders = eval_basis_derivatives(c.knots, c.degree, u, 1);
  const int span = find_span(c.knots, c.degree, u);
  const HomoPoint h0 = accumulate(c, ders.row(0), span);
  const HomoPoint h1 = accumulate(c, ders.row(1), span);
  const Vector2 pt = h0.v / h0.w;
  const Vector2 pt_u = (h1.v - pt * h1.w) / h0.w;
  if (point) *point = pt;
  if (du) *du = pt_u;
  if (!dp && !du_dp) return;

  const int np = num_params();
  if (dp) dp->assign(np, Vector2::Zero());
  if (du_dp) du_dp->assign(np, Vector2::Zero());
  for (int i = 0; i < np; ++i) {
    const Matrix& dP = d_control[i];
    const Vector& dw = d_weights[i];
    Vector2 vp = Vector2::Zero(), vpu = Vector2::Zero();
    double wp = 0.0, wpu = 0.0;
    for (int j = 0; j <= c.degree; ++j) {
      const int k = span - c.degree + j;
      const Vector2 term = dw[k] * c.control.row(k).transpose() + c.weights[k] * dP.row(k).transpose();
      vp += ders(0, j) * term;
      vpu += ders(1, j) * term;
      wp += ders(0, j) * dw[k];
      wpu += ders(1, j) * dw[k];
    }
    const Vector2 pt_p = (vp - pt * wp) / h0.w;
    if (dp) (*dp)[i] = pt_p;
    if (du_dp) (*du_dp)[i] = (vpu - pt_u * wp - pt * wpu) / h0.w - pt_p * h1.w / h0.w;
  }
}

CurveSpec CurveSpec::circle_arc(AffineExpr radius) {
  CurveSpec s;
  s.kind = Kind::CircleArc;
  s.radius = std::move(radius);
  return s;
}

CurveSpec CurveSpec::arc_sector(AffineExpr radius, double phi0, double phi1) {
  CurveSpec s;
  s.kind = Kind::ArcSector;
  s.radius = std::move(radius);
  s.phi0 = phi0;
  s.phi1 = phi1;
  return s;
}

CurveSpec CurveSpec::ellipse_arc(AffineExpr semi_x, AffineExpr semi_y, double y_stop) {
  CurveSpec s;
  s.kind = Kind::EllipseArc;
  s.semi_x = std::move(semi_x);
  s.semi_y = std::move(semi_y);
  s.y_stop = y_stop;
  return s;
}

CurveSpec CurveSpec::segment(std::array<AffineExpr, 2> a, std::array<AffineExpr, 2> b) {
  CurveSpec s;
  s.kind = Kind::Segment;
  s.a = std::move(a);
  s.b = std::move(b);
  return s;
}

CurveSpec CurveSpec::fixed_segment(const Vector2& a, const Vector2& b) {
  return segment({AffineExpr::constant_value(a.x()), AffineExpr::constant_value(a.y())},
                 {AffineExpr::constant_value(b.x()), AffineExpr::constant_value(b.y())});
}

CurveSpec CurveSpec::fixed_point(const Vector2& a) { return fixed_segment(a, a); }

namespace {

Vector quadratic_knots() {
  Vector k(6);
  k << 0, 0, 0, 1, 1, 1;
  return k;
}

Vector linear_knots() {
  Vector k(4);
  k << 0, 0, 1, 1;
  return k;
}

CurveJet make_jet(NurbsCurve curve, int num_params) {
  CurveJet jet;
  jet.curve = std::move(curve);
  jet.curve.validate();
  const int n = jet.curve.num_basis();
  jet.d_control.assign(num_params, Matrix::Zero(n, 2));
  jet.d_weights.assign(num_params, Vector::Zero(n));
  return jet;
}

CurveJet realize_circle(const CurveSpec& spec, const Vector& p, int num_params) {
  const double r = spec.radius(p);
  if (!(r > 0.0)) throw std::invalid_argument("circle_arc: radius must be positive");
  NurbsCurve c;
  c.degree = 2;
  c.knots = quadratic_knots();
  c.control.resize(3, 2);
  c.control << r, 0, r, r, 0, r;
  c.weights.resize(3);
  c.weights << 1.0, std::sqrt(0.5), 1.0;
  CurveJet jet = make_jet(std::move(c), num_params);
  for (int i = 0; i < num_params; ++i) {
    const double dr = spec.radius.deriv(i);
    if (dr == 0.0) continue;
    jet.d_control[i] << dr, 0, dr, dr, 0, dr;
  }
  return jet;
}

CurveJet realize_arc_sector(const CurveSpec& spec, const Vector& p, int num_params) {
  const double r = spec.radius(p);
  if (!(r > 0.0)) throw std::invalid_argument("arc_sector: radius must be positive");
  const double sweep = spec.phi1 - spec.phi0;
  if (!(std::abs(sweep) > 0.0 && std::abs(sweep) < 3.14159265358979323846))
    throw std::invalid_argument("arc_sector: sweep must lie in (0, pi)");
  const double mid = 0.5 * (spec.phi0 + spec.phi1);
  const double half = 0.5 * sweep;
  const Vector2 d0(std::cos(spec.phi0), std::sin(spec.phi0));
  const Vector2 d1(std::cos(spec.phi1), std::sin(spec.phi1));
  const Vector2 dm(std::cos(mid), std::sin(mid));
  const double w1 = std::cos(half);
  NurbsCurve c;
  c.degree = 2;
  c.knots = quadratic_knots();
  c.control.resize(3, 2);
  c.control.row(0) = r * d0;
  c.control.row(1) = (r / w1) * dm;
  c.control.row(2) = r * d1;
  c.weights.resize(3);
  c.weights << 1.0, w1, 1.0;
  CurveJet jet = make_jet(std::move(c), num_params);
  for (int i = 0; i < num_params; ++i) {
    const double dr = spec.radius.deriv(i);
    if (dr == 0.0) continue;
    jet.d_control[i].row(0) = dr * d0;
    jet.d_control[i].row(1) = (dr / w1) * dm;
    jet.d_control[i].row(2) = dr * d1;
  }
  return jet;
}

CurveJet realize_ellipse(const CurveSpec& spec, const Vector& p, int num_params) {
  const double ax = spec.semi_x(p);
  const double ay = spec.semi_y(p);
  const double y = spec.y_stop;
  if (!(ax > 0.0 && ay > 0.0)) throw std::invalid_argument("ellipse_arc: semi-axes must be positive");
  if (!(y > 0.0 && y < ay)) throw std::invalid_argument("ellipse_arc: end height outside (0, semi_y)");
  const double alpha = std::asin(y / ay);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double w1 = std::cos(0.5 * alpha);

  NurbsCurve c;
  c.degree = 2;
  c.knots = quadratic_knots();
  c.control.resize(3, 2);
  c.control << ax, 0.0, ax, y / (1.0 + ca), ax * ca, y;
  c.weights.resize(3);
  c.weights << 1.0, w1, 1.0;
  CurveJet jet = make_jet(std::move(c), num_params);

  // Sensitivities of the control net to the semi-axes; alpha depends on semi_y only.
  const double dP1y_day = -y * y * (sa / ca) / (ay * ay * (1.0 + ca) * (1.0 + ca));
  const double dP2x_day = ax * y * (sa / ca) / (ay * ay);
  const double dw1_day = y * std::sin(0.5 * alpha) / (2.0 * ay * ay * ca);
  for (int i = 0; i < num_params; ++i) {
    const double dax = spec.semi_x.deriv(i);
    const double day = spec.semi_y.deriv(i);
    if (dax == 0.0 && day == 0.0) continue;
    Matrix dP = Matrix::Zero(3, 2);
    dP(0, 0) = dax;
    dP(1, 0) = dax;
    dP(2, 0) = dax * ca + day * dP2x_day;
    dP(1, 1) = day * dP1y_day;
    jet.d_control[i] = dP;
    jet.d_weights[i][1] = day * dw1_day;
  }
  return jet;
}

CurveJet realize_segment(const CurveSpec& spec, const Vector& p, int num_params) {
  NurbsCurve c;
  c.degree = 1;
  c.knots = linear_knots();
  c.control.resize(2, 2);
  c.control << spec.a[0](p), spec.a[1](p), spec.b[0](p), spec.b[1](p);
  c.weights = Vector::Ones(2);
  CurveJet jet = make_jet(std::move(c), num_params);
  for (int i = 0; i < num_params; ++i) {
    Matrix dP = Matrix::Zero(2, 2);
    dP << spec.a[0].deriv(i), spec.a[1].deriv(i), spec.b[0].deriv(i), spec.b[1].deriv(i);
    if (dP.isZero(0.0)) continue;
    jet.d_control[i] = dP;
  }
  return jet;
}

}  // namespace

CurveJet realize(const CurveSpec& spec, const Vector& p, int num_params) {
  switch (spec.kind) {
    case CurveSpec::Kind::CircleArc:
      return realize_circle(spec, p, num_params);
    case CurveSpec::Kind::ArcSector:
      return realize_arc_sector(spec, p, num_params);
    case CurveSpec::Kind::EllipseArc:
      return realize_ellipse(spec, p, num_params);
    case CurveSpec::Kind::Segment:
      return realize_segment(spec, p, num_params);
  }
  throw std::logic_error("realize: unknown curve kind");
}

}  // namespace magshape
