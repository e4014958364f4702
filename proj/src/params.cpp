#include "magshape/params.hpp"

#include <cmath>
#include <stdexcept>

#include "magshape/sensitivity.hpp"

namespace magshape {

bool BoxBounds::is_finite() const {
  return lower.allFinite() && upper.allFinite();
}

bool BoxBounds::contains(const Vector& p, double tol) const {
  if (p.size() != lower.size()) throw std::invalid_argument("BoxBounds::contains: dimension mismatch");
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] < lower[i] - tol || p[i] > upper[i] + tol) return false;
  }
  return true;
}

BoxBounds BoxBounds::unbounded(int dim) {
  BoxBounds b;
  b.lower = Vector::Constant(dim, -kInf);
  b.upper = Vector::Constant(dim, kInf);
  return b;
}

Vector project_to_box(const Vector& p, const BoxBounds& box) {
  if (p.size() != box.lower.size() || p.size() != box.upper.size())
    throw std::invalid_argument("project_to_box: dimension mismatch");
  Vector q(p.size());
  for (int i = 0; i < p.size(); ++i) {
    if (box.lower[i] > box.upper[i]) throw std::invalid_argument("project_to_box: empty box");
    q[i] = std::min(std::max(p[i], box.lower[i]), box.upper[i]);
  }
  return q;
}

namespace {

// Row layout shared by every ConstraintSet query.
struct RowLayout {
  std::vector<int> lower_idx, upper_idx;
};

RowLayout layout(const BoxBounds& box) {
  RowLayout rl;
  for (int i = 0; i < box.dim(); ++i)
    if (std::isfinite(box.lower[i])) rl.lower_idx.push_back(i);
  for (int i = 0; i < box.dim(); ++i)
    if (std::isfinite(box.upper[i])) rl.upper_idx.push_back(i);
  return rl;
}

}  // namespace

int ConstraintSet::num_rows() const {
  const RowLayout rl = layout(box);
  return static_cast<int>(rl.lower_idx.size() + rl.upper_idx.size() + nonlinear.size());
}

std::vector<std::string> ConstraintSet::row_names() const {
  const RowLayout rl = layout(box);
  std::vector<std::string> names;
  names.reserve(num_rows());
  for (int i : rl.lower_idx) names.push_back("lower_p" + std::to_string(i + 1));
  for (int i : rl.upper_idx) names.push_back("upper_p" + std::to_string(i + 1));
  for (const auto& c : nonlinear) names.push_back(c.name);
  return names;
}

Vector ConstraintSet::evaluate(const Vector& p) const {
  const RowLayout rl = layout(box);
  Vector g(num_rows());
  int r = 0;
  for (int i : rl.lower_idx) g[r++] = box.lower[i] - p[i];
  for (int i : rl.upper_idx) g[r++] = p[i] - box.upper[i];
  for (const auto& c : nonlinear) g[r++] = c.value(p);
  return g;
}

Matrix ConstraintSet::gradients(const Vector& p) const {
  const RowLayout rl = layout(box);
  Matrix grad = Matrix::Zero(num_rows(), p.size());
  int r = 0;
  for (int i : rl.lower_idx) grad(r++, i) = -1.0;
  for (int i : rl.upper_idx) grad(r++, i) = 1.0;
  for (const auto& c : nonlinear) {
    grad.row(r++) = (c.gradient ? c.gradient(p) : fd_gradient(c.value, p)).transpose();
  }
  return grad;
}

bool ConstraintSet::row_expensive(int row) const {
  const RowLayout rl = layout(box);
  const int nbox = static_cast<int>(rl.lower_idx.size() + rl.upper_idx.size());
  if (row < 0 || row >= num_rows()) throw std::out_of_range("ConstraintSet::row_expensive");
  return row >= nbox && nonlinear[row - nbox].expensive;
}

bool ConstraintSet::feasible(const Vector& p, double tol) const {
  return (evaluate(p).array() <= tol).all();
}

ConstraintSet ConstraintSet::box_only(BoxBounds box) {
  ConstraintSet cs;
  cs.box = std::move(box);
  return cs;
}

bool UncertaintySet::contains(const Vector& delta, double tol) const {
  if (delta.size() != radius.size()) throw std::invalid_argument("UncertaintySet::contains: dimension mismatch");
  return (delta.array().abs() <= radius.array() + tol).all();
}

}  // namespace magshape
