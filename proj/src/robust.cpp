#include "magshape/robust.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "magshape/sensitivity.hpp"

namespace magshape {

double worst_case_value(double value, const Vector& gradient, const UncertaintySet& u) {
  if (gradient.size() != u.radius.size())
    throw std::invalid_argument("worst_case_value: dimension mismatch");
  return value + u.radius.cwiseProduct(gradient.cwiseAbs()).sum();
}

Vector worst_case_shift(const Vector& gradient, const UncertaintySet& u) {
  Vector shift(u.radius.size());
  for (int i = 0; i < shift.size(); ++i)
    shift[i] = gradient[i] < 0.0 ? -u.radius[i] : u.radius[i];
  return shift;
}

double robust_objective_value(const OptimizationProblem& base, const UncertaintySet& u,
                              const Vector& p) {
  return worst_case_value(base.eval_objective(p), base.eval_gradient(p), u);
}

CornerCheck corner_feasibility(const ConstraintSet& constraints, const Vector& p,
                               const UncertaintySet& u, double tol) {
  const int n = static_cast<int>(p.size());
  if (u.radius.size() != n) throw std::invalid_argument("corner_feasibility: dimension mismatch");
  CornerCheck check;
  check.worst_corner = Vector::Zero(n);
  check.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Vector shift(n);
    for (int i = 0; i < n; ++i) shift[i] = (mask >> i) & 1 ? u.radius[i] : -u.radius[i];
    const double worst = constraints.evaluate(p + shift).maxCoeff();
    if (worst > check.worst_violation) {
      check.worst_violation = worst;
      check.worst_corner = shift;
    }
    if (worst > tol) check.feasible = false;
  }
  return check;
}

namespace {

// Base-problem derivative data shared by all expanded-problem closures.
struct DerivativeCache {
  OptimizationProblem base;  // copy with patched constraint gradients
  UncertaintySet u;
  RobustSettings settings;
  int dim = 0;
  int rows = 0;

  Vector grad_point;
  Vector grad_f;
  Matrix grad_g;  // rows x dim
  bool grads_valid = false;

  Vector hess_point;
  Matrix hess_f;
  std::vector<Matrix> hess_g;
  bool hess_valid = false;

  void ensure_grads(const Vector& p) {
    if (grads_valid && grad_point.size() == p.size() && (grad_point.array() == p.array()).all())
      return;
    grad_f = base.eval_gradient(p);
    grad_g = base.eval_constraint_gradients(p);
    grad_point = p;
    grads_valid = true;
  }

  void ensure_hessians(const Vector& p) {
    if (hess_valid && hess_point.size() == p.size() && (hess_point.array() == p.array()).all())
      return;
    hess_f = Matrix::Zero(dim, dim);
    hess_g.assign(rows, Matrix::Zero(dim, dim));
    for (int j = 0; j < dim; ++j) {
      const double h = settings.hessian_rel_step * std::max(std::abs(p[j]), 1.0);
      Vector q = p;
      q[j] = p[j] + h;
      const Vector gf_plus = base.eval_gradient(q);
      const Matrix gg_plus = base.eval_constraint_gradients(q);
      q[j] = p[j] - h;
      const Vector gf_minus = base.eval_gradient(q);
      const Matrix gg_minus = base.eval_constraint_gradients(q);
      hess_f.col(j) = (gf_plus - gf_minus) / (2.0 * h);
      for (int m = 0; m < rows; ++m)
        hess_g[m].col(j) = (gg_plus.row(m) - gg_minus.row(m)).transpose() / (2.0 * h);
    }
    hess_f = 0.5 * (hess_f + hess_f.transpose()).eval();
    for (Matrix& hm : hess_g) hm = 0.5 * (hm + hm.transpose()).eval();
    hess_point = p;
    hess_valid = true;
  }

  // Gradient of F_block (block 0 = objective, block m+1 = constraint row m).
  [[nodiscard]] Vector block_gradient(int block) const {
    return block == 0 ? grad_f : grad_g.row(block - 1).transpose();
  }
  [[nodiscard]] const Matrix& block_hessian(int block) const {
    return block == 0 ? hess_f : hess_g[block - 1];
  }
};

// Wraps missing constraint gradients with central differences so the
// expanded problem always has row gradients.
ConstraintSet patch_gradients(const ConstraintSet& cs) {
  ConstraintSet out = cs;
  for (auto& c : out.nonlinear) {
    if (c.gradient) continue;
    const auto value = c.value;
    c.gradient = [value](const Vector& p) { return fd_gradient(value, p, 1e-6, true); };
  }
  return out;
}

}  // namespace

RobustProblem robustify(const OptimizationProblem& base, const UncertaintySet& u,
                        const RobustSettings& settings) {
  if (!base.gradient) throw std::invalid_argument("robustify: base problem has no gradient");
  const int dim = base.dim();
  if (u.radius.size() != dim) throw std::invalid_argument("robustify: uncertainty dimension mismatch");
  if ((u.radius.array() <= 0.0).any())
    throw std::invalid_argument("robustify: uncertainty radii must be positive");

  auto cache = std::make_shared<DerivativeCache>();
  cache->base = base;
  cache->base.constraints = patch_gradients(base.constraints);
  cache->u = u;
  cache->settings = settings;
  cache->dim = dim;
  cache->rows = base.constraints.num_rows();
  const int rows = cache->rows;
  const int blocks = rows + 1;            // objective slack block + one per row
  const int zdim = dim + dim * blocks;

  RobustProblem rp;
  rp.base_dim = dim;
  rp.base_rows = rows;

  OptimizationProblem& ex = rp.expanded;
  ex.ledger = base.ledger;
  ex.constraints.box = BoxBounds::unbounded(zdim);

  ex.objective = [cache, dim](const Vector& z) {
    return cache->base.eval_objective(z.head(dim)) + z.segment(dim, dim).sum();
  };
  ex.gradient = [cache, dim, zdim](const Vector& z) {
    Vector g = Vector::Zero(zdim);
    cache->ensure_grads(z.head(dim));
    g.head(dim) = cache->grad_f;
    g.segment(dim, dim).setOnes();
    return g;
  };

  // Base rows, shifted by their slack block.
  for (int m = 0; m < rows; ++m) {
    Constraint row;
    row.name = "robust_row_" + std::to_string(m);
    row.value = [cache, dim, m](const Vector& z) {
      const Vector p = z.head(dim);
      const double g = cache->base.eval_constraints(p)[m];
      return g + z.segment(dim + dim * (m + 1), dim).sum();
    };
    row.gradient = [cache, dim, zdim, m](const Vector& z) {
      cache->ensure_grads(z.head(dim));
      Vector g = Vector::Zero(zdim);
      g.head(dim) = cache->grad_g.row(m).transpose();
      g.segment(dim + dim * (m + 1), dim).setOnes();
      return g;
    };
    ex.constraints.nonlinear.push_back(std::move(row));
  }

  // Slack dominance rows: +-(radius_i dF/dp_i) <= xi_{block,i}.
  for (int block = 0; block < blocks; ++block) {
    for (int i = 0; i < dim; ++i) {
      for (const double sign : {+1.0, -1.0}) {
        Constraint row;
        row.name = "slack_b" + std::to_string(block) + "_i" + std::to_string(i) +
                   (sign > 0 ? "_pos" : "_neg");
        row.value = [cache, dim, block, i, sign](const Vector& z) {
          cache->ensure_grads(z.head(dim));
          const double sens = cache->u.radius[i] * cache->block_gradient(block)[i];
          return sign * sens - z[dim + dim * block + i];
        };
        row.gradient = [cache, dim, zdim, block, i, sign](const Vector& z) {
          const Vector p = z.head(dim);
          cache->ensure_hessians(p);
          Vector g = Vector::Zero(zdim);
          g.head(dim) = sign * cache->u.radius[i] * cache->block_hessian(block).row(i).transpose();
          g[dim + dim * block + i] = -1.0;
          return g;
        };
        ex.constraints.nonlinear.push_back(std::move(row));
      }
    }
  }

  // Start from the base initial point with slacks at their active values.
  cache->ensure_grads(base.initial);
  Vector z0 = Vector::Zero(zdim);
  z0.head(dim) = base.initial;
  for (int block = 0; block < blocks; ++block)
    z0.segment(dim + dim * block, dim) =
        cache->u.radius.cwiseProduct(cache->block_gradient(block).cwiseAbs());
  ex.initial = z0;
  return rp;
}

}  // namespace magshape
