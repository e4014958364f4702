#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "magshape/ledger.hpp"
#include "magshape/types.hpp"

namespace magshape {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Scalar affine function of the design vector: constant + sum coeff_i * p_i.
/// Used to bind geometry (control points, subdomain vertices) to parameters.
struct AffineExpr {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  [[nodiscard]] double operator()(const Vector& p) const {
    double v = constant;
    for (const auto& [i, w] : terms) v += w * p[i];
    return v;
  }

  [[nodiscard]] double deriv(int param) const {
    double v = 0.0;
    for (const auto& [i, w] : terms)
      if (i == param) v += w;
    return v;
  }

  [[nodiscard]] static AffineExpr constant_value(double c) { return {c, {}}; }
  [[nodiscard]] static AffineExpr scaled_param(int i, double w, double c = 0.0) {
    return {c, {{i, w}}};
  }
};

/// Box bounds with +-inf sentinels for absent bounds.
struct BoxBounds {
  Vector lower, upper;

  [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
  [[nodiscard]] bool is_finite() const;
  [[nodiscard]] bool contains(const Vector& p, double tol = 0.0) const;
  [[nodiscard]] static BoxBounds unbounded(int dim);
};

/// Clamp p onto the box. Rejects boxes with lower > upper.
[[nodiscard]] Vector project_to_box(const Vector& p, const BoxBounds& box);

/// One scalar inequality g(p) <= 0 with optional analytic gradient.
struct Constraint {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;  // null -> finite differences
  bool expensive = false;  // deferred by PSO until cheap constraints pass
};

/// Box rows plus explicit nonlinear rows, all in the form g_m(p) <= 0.
/// Row order: finite lower bounds, finite upper bounds, then nonlinear rows.
struct ConstraintSet {
  BoxBounds box;
  std::vector<Constraint> nonlinear;

  [[nodiscard]] int num_rows() const;
  [[nodiscard]] std::vector<std::string> row_names() const;
  [[nodiscard]] Vector evaluate(const Vector& p) const;
  [[nodiscard]] Matrix gradients(const Vector& p) const;  // rows x dim
  [[nodiscard]] bool row_expensive(int row) const;
  [[nodiscard]] bool feasible(const Vector& p, double tol = 0.0) const;

  [[nodiscard]] static ConstraintSet box_only(BoxBounds box);
};

/// Axis-aligned uncertainty box {delta : |delta_i| <= radius_i}.
struct UncertaintySet {
  Vector radius;  // diag(D) > 0

  [[nodiscard]] bool contains(const Vector& delta, double tol = 0.0) const;
};

}  // namespace magshape
