#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "magshape/nurbs.hpp"

using namespace magshape;

namespace {

Vector knots6() {
  Vector k(6);
  k << 0, 0, 0, 1, 1, 1;
  return k;
}

Vector knots7() {
  Vector k(7);
  k << 0, 0, 0, 0.5, 1, 1, 1;
  return k;
}

Vector single(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_SUITE("nurbs") {

TEST_CASE("quadratic Bernstein values on a single span") {
  const Eigen::VectorXd mid = eval_basis(knots6(), 2, 0.5);
  CHECK(mid[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(mid[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mid[2] == doctest::Approx(0.25).epsilon(1e-15));

  const Eigen::VectorXd left = eval_basis(knots6(), 2, 0.0);
  CHECK(left[0] == 1.0);
  CHECK(left[1] == 0.0);
  CHECK(left[2] == 0.0);

  const Eigen::VectorXd right = eval_basis(knots6(), 2, 1.0);
  CHECK(right[0] == 0.0);
  CHECK(right[1] == 0.0);
  CHECK(right[2] == 1.0);
}

TEST_CASE("two-span quadratic basis at a quarter") {
  const Eigen::VectorXd v = eval_basis(knots7(), 2, 0.25);
  CHECK(v[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(v[2] == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("basis values sum to one across the knot range") {
  for (int s = 0; s <= 40; ++s) {
    const double u = s / 40.0;
    CHECK(eval_basis(knots7(), 2, u).sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("parameters outside the knot range are rejected") {
  CHECK_THROWS_AS((void)eval_basis(knots6(), 2, -0.01), std::out_of_range);
  CHECK_THROWS_AS((void)eval_basis(knots6(), 2, 1.01), std::out_of_range);
}

TEST_CASE("basis derivatives match divided differences") {
  const double u = 0.3, h = 1e-7;
  const Matrix d = eval_basis_derivatives(knots7(), 2, u, 1);
  const Eigen::VectorXd lo = eval_basis(knots7(), 2, u - h);
  const Eigen::VectorXd hi = eval_basis(knots7(), 2, u + h);
  for (int i = 0; i < 3; ++i) {
    CHECK(d(1, i) == doctest::Approx((hi[i] - lo[i]) / (2 * h)).epsilon(1e-6));
    CHECK(d(0, i) == doctest::Approx(eval_basis(knots7(), 2, u)[i]).epsilon(1e-15));
  }
}

TEST_CASE("invalid curve data is rejected") {
  NurbsCurve c;
  c.degree = 2;
  c.knots = knots6();
  c.control = Matrix::Zero(3, 2);
  c.weights = Vector::Ones(3);
  CHECK_NOTHROW(c.validate());
  c.weights[1] = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.weights[1] = 1.0;
  c.knots[3] = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("quarter-circle arc is exact") {
  const double r = 5.1e-3;
  const CurveJet jet = realize(CurveSpec::circle_arc(AffineExpr::scaled_param(0, 1.0)),
                               single(r), 1);
  CHECK(jet.curve.control(0, 0) == doctest::Approx(r).epsilon(1e-15));
  CHECK(jet.curve.control(1, 0) == doctest::Approx(r).epsilon(1e-15));
  CHECK(jet.curve.control(1, 1) == doctest::Approx(r).epsilon(1e-15));
  CHECK(jet.curve.weights[1] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));

  const Vector2 mid = eval_curve(jet.curve, 0.5);
  CHECK(mid.x() == doctest::Approx(r / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(mid.y() == doctest::Approx(r / std::sqrt(2.0)).epsilon(1e-14));

  for (int s = 0; s <= 99; ++s) {
    const Vector2 x = eval_curve(jet.curve, s / 99.0);
    CHECK(std::abs(x.squaredNorm() - r * r) <= 1e-12 * r * r);
  }
}

TEST_CASE("nonpositive circle radius is rejected") {
  CHECK_THROWS_AS((void)realize(CurveSpec::circle_arc(AffineExpr::scaled_param(0, 1.0)),
                                single(0.0), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)realize(CurveSpec::circle_arc(AffineExpr::scaled_param(0, 1.0)),
                                single(-1.0), 1),
                  std::invalid_argument);
}

TEST_CASE("radius derivative of the circle arc is radial") {
  const double r = 2.0;
  const CurveJet jet = realize(CurveSpec::circle_arc(AffineExpr::scaled_param(0, 1.0)),
                               single(r), 1);
  for (double u : {0.0, 0.31, 0.77, 1.0}) {
    const Vector2 point = eval_curve(jet.curve, u);
    const Vector2 dp = jet.point_param_derivative(u, 0);
    CHECK((dp - point / r).norm() <= 1e-13);
  }
}

TEST_CASE("ellipse arc with unit axes reproduces the circle") {
  const double alpha = std::asin(0.5);  // 30 degrees
  const CurveJet jet = realize(CurveSpec::ellipse_arc(AffineExpr::constant_value(1.0),
                                                      AffineExpr::constant_value(1.0), 0.5),
                               Vector(0), 0);
  CHECK(jet.curve.control(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jet.curve.control(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(jet.curve.control(2, 0) == doctest::Approx(std::cos(alpha)).epsilon(1e-15));
  CHECK(jet.curve.control(2, 1) == doctest::Approx(std::sin(alpha)).epsilon(1e-15));
  CHECK(jet.curve.weights[1] == doctest::Approx(std::cos(alpha / 2)).epsilon(1e-15));

  // interior control point sits on the tangent intersection
  const double lambda = (std::cos(alpha) - 1.0) / std::sin(alpha);
  CHECK(lambda == doctest::Approx(-std::tan(alpha / 2)).epsilon(1e-14));
  CHECK(jet.curve.control(1, 0) ==
        doctest::Approx(std::cos(alpha) - lambda * std::sin(alpha)).epsilon(1e-13));

  for (int s = 0; s <= 99; ++s) {
    const Vector2 x = eval_curve(jet.curve, s / 99.0);
    CHECK(std::abs(x.squaredNorm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("die-face ellipse arc stays on its conic") {
  const double ax = 16e-3, ay = 14.5e-3, stop = 10.5e-3;
  const CurveJet jet = realize(CurveSpec::ellipse_arc(AffineExpr::scaled_param(0, 1.0),
                                                      AffineExpr::scaled_param(1, 1.0), stop),
                               (Vector(2) << ax, ay).finished(), 2);
  const double alpha = std::asin(stop / ay);
  CHECK(alpha == doctest::Approx(0.80868).epsilon(1e-4));
  for (int s = 0; s <= 99; ++s) {
    const Vector2 x = eval_curve(jet.curve, s / 99.0);
    const double conic = x.x() * x.x() / (ax * ax) + x.y() * x.y() / (ay * ay);
    CHECK(std::abs(conic - 1.0) <= 1e-12);
  }
  const Vector2 top = eval_curve(jet.curve, 1.0);
  CHECK(top.y() == doctest::Approx(stop).epsilon(1e-14));
}

TEST_CASE("ellipse stop heights outside the open interval are rejected") {
  const Vector p = (Vector(2) << 1.0, 1.0).finished();
  CHECK_THROWS_AS((void)realize(CurveSpec::ellipse_arc(AffineExpr::scaled_param(0, 1.0),
                                                       AffineExpr::scaled_param(1, 1.0), 0.0),
                                p, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)realize(CurveSpec::ellipse_arc(AffineExpr::scaled_param(0, 1.0),
                                                       AffineExpr::scaled_param(1, 1.0), 1.0),
                                p, 2),
                  std::invalid_argument);
}

TEST_CASE("segments interpolate their bound endpoints") {
  const CurveSpec spec = CurveSpec::segment(
      {AffineExpr::constant_value(0.0), AffineExpr::constant_value(0.0)},
      {AffineExpr::scaled_param(0, 1.0), AffineExpr::constant_value(2.0)});
  const CurveJet jet = realize(spec, single(4.0), 1);
  CHECK((eval_curve(jet.curve, 0.0) - Vector2(0, 0)).norm() <= 1e-15);
  CHECK((eval_curve(jet.curve, 1.0) - Vector2(4, 2)).norm() <= 1e-15);
  CHECK((eval_curve(jet.curve, 0.5) - Vector2(2, 1)).norm() <= 1e-14);
  CHECK((jet.point_param_derivative(0.5, 0) - Vector2(0.5, 0)).norm() <= 1e-14);
}

TEST_CASE("arc sector spans its angular range") {
  const double r = 3.0, phi0 = 0.2, phi1 = 1.1;
  const CurveJet jet = realize(CurveSpec::arc_sector(AffineExpr::scaled_param(0, 1.0), phi0, phi1),
                               single(r), 1);
  const Vector2 a = eval_curve(jet.curve, 0.0), b = eval_curve(jet.curve, 1.0);
  CHECK((a - r * Vector2(std::cos(phi0), std::sin(phi0))).norm() <= 1e-13);
  CHECK((b - r * Vector2(std::cos(phi1), std::sin(phi1))).norm() <= 1e-13);
  for (int s = 0; s <= 50; ++s) {
    const Vector2 x = eval_curve(jet.curve, s / 50.0);
    CHECK(std::abs(x.norm() - r) <= 1e-12 * r);
  }
}

TEST_CASE("curve derivative matches divided differences") {
  const CurveJet jet = realize(CurveSpec::circle_arc(AffineExpr::scaled_param(0, 1.0)),
                               single(1.0), 1);
  const double u = 0.4, h = 1e-7;
  const Vector2 fd = (eval_curve(jet.curve, u + h) - eval_curve(jet.curve, u - h)) / (2 * h);
  CHECK((eval_curve_derivative(jet.curve, u) - fd).norm() <= 1e-6);
}

}  // TEST_SUITE
