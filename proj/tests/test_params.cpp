#include <stdexcept>

#include "doctest.h"
#include "magshape/params.hpp"

using namespace magshape;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("params") {

TEST_CASE("affine expressions evaluate and differentiate") {
  AffineExpr e{2.0, {{0, 1.0}, {1, 3.0}}};
  CHECK(e(vec({1.0, 2.0})) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(e.deriv(0) == 1.0);
  CHECK(e.deriv(1) == 3.0);
  CHECK(e.deriv(2) == 0.0);
  CHECK(AffineExpr::constant_value(4.5)(vec({7.0})) == 4.5);
  const AffineExpr s = AffineExpr::scaled_param(1, 2.0, -1.0);
  CHECK(s(vec({0.0, 3.0})) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("box projection clamps out-of-range components only") {
  BoxBounds box{vec({5.1}), vec({9.0})};
  CHECK(project_to_box(vec({4.0}), box)[0] == 5.1);
  CHECK(project_to_box(vec({9.5}), box)[0] == 9.0);
  CHECK(project_to_box(vec({7.3}), box)[0] == 7.3);
}

TEST_CASE("box projection is idempotent") {
  BoxBounds box{vec({-1.0, 0.0, 2.0}), vec({1.0, 0.0, kInf})};
  const Vector p = vec({-3.0, 5.0, 1.0});
  const Vector once = project_to_box(p, box);
  const Vector twice = project_to_box(once, box);
  CHECK((twice - once).norm() == 0.0);
  CHECK(box.contains(once));
}

TEST_CASE("inverted bounds are rejected") {
  BoxBounds box{vec({2.0}), vec({1.0})};
  CHECK_THROWS_AS((void)project_to_box(vec({0.0}), box), std::invalid_argument);
}

TEST_CASE("infinite bounds mark the box as unbounded") {
  CHECK_FALSE(BoxBounds::unbounded(3).is_finite());
  CHECK(BoxBounds::unbounded(2).contains(vec({1e100, -1e100})));
  BoxBounds box{vec({0.0, 1.0}), vec({1.0, 2.0})};
  CHECK(box.is_finite());
  CHECK(box.contains(vec({0.5, 1.5})));
  CHECK_FALSE(box.contains(vec({0.5, 2.5})));
  CHECK(box.contains(vec({0.5, 2.0 + 1e-12}), 1e-9));
}

TEST_CASE("constraint rows come in lower, upper, nonlinear order") {
  ConstraintSet set;
  set.box.lower = vec({0.0, -kInf});
  set.box.upper = vec({1.0, 2.0});
  Constraint ring;
  ring.name = "ring_fit";
  ring.value = [](const Vector& p) { return p[1] + p[2] - 15.0; };
  ring.gradient = [](const Vector& p) {
    Vector g = Vector::Zero(p.size());
    g[1] = g[2] = 1.0;
    return g;
  };
  ConstraintSet sized;
  sized.box = BoxBounds::unbounded(3);
  sized.nonlinear.push_back(ring);
  CHECK(sized.num_rows() == 1);
  CHECK(sized.evaluate(vec({3.0, 7.0, 7.0}))[0] == doctest::Approx(-1.0).epsilon(1e-15));

  CHECK(set.num_rows() == 3);  // one finite lower, two finite upper
  const Vector rows = set.evaluate(vec({0.5, 3.0}));
  CHECK(rows[0] == doctest::Approx(-0.5));  // 0 - p0
  CHECK(rows[1] == doctest::Approx(-0.5));  // p0 - 1
  CHECK(rows[2] == doctest::Approx(1.0));   // p1 - 2
  CHECK_FALSE(set.feasible(vec({0.5, 3.0})));
  CHECK(set.feasible(vec({0.5, 1.0})));
  CHECK(set.row_names().size() == 3);
}

TEST_CASE("missing constraint gradients fall back to central differences") {
  Constraint g;
  g.name = "quadratic";
  g.value = [](const Vector& p) { return p[0] * p[0] + 3.0 * p[1]; };
  ConstraintSet set;
  set.box = BoxBounds::unbounded(2);
  set.nonlinear.push_back(g);
  const Matrix grad = set.gradients(vec({3.0, 1.0}));
  // central differences are exact for quadratics up to rounding
  CHECK(grad(0, 0) == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(grad(0, 1) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("constraint gradients honor analytic rows") {
  Constraint g;
  g.name = "linear";
  g.value = [](const Vector& p) { return p[0] - p[1]; };
  g.gradient = [](const Vector& p) { return vec({1.0, -1.0}); };
  ConstraintSet set;
  set.box.lower = vec({0.0, 0.0});
  set.box.upper = vec({kInf, kInf});
  set.nonlinear.push_back(g);
  const Matrix grad = set.gradients(vec({0.5, 0.5}));
  CHECK(grad.rows() == 3);
  CHECK(grad(0, 0) == -1.0);  // lower row of p0
  CHECK(grad(1, 1) == -1.0);  // lower row of p1
  CHECK(grad(2, 0) == 1.0);
  CHECK(grad(2, 1) == -1.0);
}

TEST_CASE("expensive rows are flagged after cheap rows") {
  Constraint cheap, costly;
  cheap.name = "cheap";
  cheap.value = [](const Vector&) { return -1.0; };
  costly.name = "field";
  costly.value = [](const Vector&) { return -1.0; };
  costly.expensive = true;
  ConstraintSet set;
  set.box.lower = vec({0.0});
  set.box.upper = vec({1.0});
  set.nonlinear = {cheap, costly};
  CHECK_FALSE(set.row_expensive(0));
  CHECK_FALSE(set.row_expensive(1));
  CHECK_FALSE(set.row_expensive(2));
  CHECK(set.row_expensive(3));
}

TEST_CASE("uncertainty box membership scales by the per-axis radius") {
  UncertaintySet u{vec({1.0, 2.0})};
  CHECK(u.contains(vec({1.0, -2.0})));
  CHECK(u.contains(vec({0.0, 0.0})));
  CHECK_FALSE(u.contains(vec({1.0 + 1e-9, 0.0})));
  CHECK(u.contains(vec({1.0 + 1e-9, 0.0}), 1e-6));
}

}  // TEST_SUITE
