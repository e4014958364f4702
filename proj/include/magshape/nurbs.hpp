#pragma once

#include <array>
#include <vector>

#include "magshape/params.hpp"
#include "magshape/types.hpp"

namespace magshape {

/// Planar NURBS curve on a clamped knot vector over [u_min, u_max].
struct NurbsCurve {
  int degree = 0;
  Vector knots;    // nondecreasing, clamped (degree+1 repeats at both ends)
  Matrix control;  // n x 2 control points
  Vector weights;  // n positive weights

  [[nodiscard]] int num_basis() const { return static_cast<int>(control.rows()); }
  void validate() const;  // throws std::invalid_argument on inconsistency
};

/// Index s with knots[s] <= u < knots[s+1] (last nonempty span at u_max).
[[nodiscard]] int find_span(const Vector& knots, int degree, double u);

/// The degree+1 nonzero basis values at u, for functions span-degree .. span.
[[nodiscard]] Eigen::VectorXd eval_basis(const Vector& knots, int degree, double u);

/// Rows 0..order of derivatives of the nonzero basis functions at u
/// (row 0 = values). order <= degree is meaningful; higher rows are zero.
[[nodiscard]] Matrix eval_basis_derivatives(const Vector& knots, int degree, double u, int order);

/// Point on the curve.
[[nodiscard]] Vector2 eval_curve(const NurbsCurve& c, double u);

/// First derivative dC/du.
[[nodiscard]] Vector2 eval_curve_derivative(const NurbsCurve& c, double u);

/// A curve whose control net is an affine function of the design vector.
/// Realize with realize(); derivative data covers dC/dp and d2C/du dp.
struct CurveJet {
  NurbsCurve curve;
  std::vector<Matrix> d_control;  // per design parameter, n x 2
  std::vector<Vector> d_weights;  // per design parameter, n

  [[nodiscard]] int num_params() const { return static_cast<int>(d_control.size()); }
  /// dC/dp_i at fixed u.
  [[nodiscard]] Vector2 point_param_derivative(double u, int param) const;
  /// Point, dC/du, dC/dp_i and d2C/(du dp_i) in one basis evaluation.
  void eval_all(double u, Vector2* point, Vector2* du, std::vector<Vector2>* dp,
                std::vector<Vector2>* du_dp) const;
};

/// Declarative curve description with parameter bindings. Kinds:
///  - CircleArc: quarter circle from (r,0) to (0,r), radius bound to an expression
///  - ArcSector: circular arc radius r from angle phi0 to phi1, |phi1-phi0| < pi
///  - EllipseArc: quarter-family arc of the ellipse (x/a)^2 + (y/b)^2 = 1 from
///    (a, 0) up to height y_stop (requires 0 < y_stop < b over the admissible box)
///  - Segment: straight line a -> b, each endpoint coordinate an expression
struct CurveSpec {
  enum class Kind { CircleArc, ArcSector, EllipseArc, Segment };
  Kind kind = Kind::Segment;
  AffineExpr radius;                     // CircleArc, ArcSector
  double phi0 = 0.0, phi1 = 0.0;         // ArcSector
  AffineExpr semi_x, semi_y;             // EllipseArc semi-axes
  double y_stop = 0.0;                   // EllipseArc end height
  std::array<AffineExpr, 2> a, b;        // Segment endpoints

  [[nodiscard]] static CurveSpec circle_arc(AffineExpr radius);
  [[nodiscard]] static CurveSpec arc_sector(AffineExpr radius, double phi0, double phi1);
  [[nodiscard]] static CurveSpec ellipse_arc(AffineExpr semi_x, AffineExpr semi_y, double y_stop);
  [[nodiscard]] static CurveSpec segment(std::array<AffineExpr, 2> a, std::array<AffineExpr, 2> b);
  [[nodiscard]] static CurveSpec fixed_segment(const Vector2& a, const Vector2& b);
  [[nodiscard]] static CurveSpec fixed_point(const Vector2& a);
};

/// Instantiate a spec at design vector p, with derivative data for num_params
/// parameters. Throws std::invalid_argument on out-of-range geometry.
[[nodiscard]] CurveJet realize(const CurveSpec& spec, const Vector& p, int num_params);

}  // namespace magshape
