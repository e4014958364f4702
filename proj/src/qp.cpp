#include "magshape/qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace magshape {

namespace {

struct KktStep {
  Vector d;
  Vector multipliers;  // one per working row
  bool solvable = false;
};

// Equality-constrained subproblem on the working set:
//   [H  Aw'] [d  ]   [-(Hx+g)  ]
//   [Aw  0 ] [lam] = [bw - Aw x]
KktStep solve_kkt(const Matrix& hessian, const Vector& grad_at_x, const Matrix& a_w,
                  const Vector& resid_w) {
  const int n = static_cast<int>(hessian.rows());
  const int k = static_cast<int>(a_w.rows());
  Matrix kkt = Matrix::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = hessian;
  if (k > 0) {
    kkt.topRightCorner(n, k) = a_w.transpose();
    kkt.bottomLeftCorner(k, n) = a_w;
  }
  Vector rhs(n + k);
  rhs.head(n) = -grad_at_x;
  rhs.tail(k) = resid_w;

  Eigen::FullPivLU<Matrix> lu(kkt);
  KktStep step;
  if (lu.rank() < n + k) return step;  // degenerate working set
  const Vector sol = lu.solve(rhs);
  step.d = sol.head(n);
  step.multipliers = sol.tail(k);
  step.solvable = true;
  return step;
}

// Primal active-set iteration from a feasible start.
QpResult active_set(const QpProblem& qp, Vector x, const QpSettings& settings) {
  const int n = static_cast<int>(qp.hessian.rows());
  const int m = static_cast<int>(qp.constraints.rows());
  const int max_it =
      settings.max_iterations > 0 ? settings.max_iterations : 50 * (n + m + 1);
  std::vector<int> working;  // insertion-ordered

  QpResult result;
  for (int it = 0; it < max_it; ++it) {
    result.iterations = it + 1;
    const Vector grad_at_x = qp.hessian * x + qp.gradient;
    Matrix a_w(static_cast<int>(working.size()), n);
    Vector resid_w(static_cast<int>(working.size()));
    for (size_t i = 0; i < working.size(); ++i) {
      a_w.row(static_cast<int>(i)) = qp.constraints.row(working[i]);
      resid_w[static_cast<int>(i)] = qp.bounds[working[i]] - qp.constraints.row(working[i]).dot(x);
    }

    KktStep step = solve_kkt(qp.hessian, grad_at_x, a_w, resid_w);
    if (!step.solvable) {
      // Newest row made the working set degenerate; drop it and retry.
      if (working.empty()) throw std::runtime_error("qp_solve: singular Hessian");
      working.pop_back();
      continue;
    }

    // Both the zero-step and multiplier thresholds scale with the gradient:
    // the KKT solve's rounding noise on d is proportional to the multiplier
    // magnitude, which tracks |grad|, not |x|.
    const double scale = 1.0 + x.norm() + grad_at_x.norm();
    if (step.d.norm() <= settings.tol * scale) {
      int worst = -1;
      double worst_val = -settings.tol * scale;
      for (size_t i = 0; i < working.size(); ++i) {
        if (step.multipliers[static_cast<int>(i)] < worst_val) {
          worst_val = step.multipliers[static_cast<int>(i)];
          worst = static_cast<int>(i);
        }
      }
      if (worst < 0) {
        result.x = x;
        result.multipliers = Vector::Zero(m);
        for (size_t i = 0; i < working.size(); ++i)
          result.multipliers[working[i]] = std::max(0.0, step.multipliers[static_cast<int>(i)]);
        result.converged = true;
        return result;
      }
      working.erase(working.begin() + worst);
      continue;
    }

    // Step length limited by the nearest inactive constraint. The threshold
    // scales with |a||d| so rounding noise on a long direction cannot nominate
    // a row the KKT system already enforces.
    double alpha = 1.0;
    int blocker = -1;
    for (int i = 0; i < m; ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end()) continue;
      const double den = qp.constraints.row(i).dot(step.d);
      if (den <= settings.tol * (1.0 + qp.constraints.row(i).norm() * step.d.norm())) continue;
      const double slack = qp.bounds[i] - qp.constraints.row(i).dot(x);
      const double t = std::max(0.0, slack) / den;
      if (t < alpha) {
        alpha = t;
        blocker = i;
      }
    }
    x += alpha * step.d;
    if (blocker >= 0) {
      // If the entering normal is a combination of the working normals, one
      // of those rows must leave first, or the add/drop pair cycles forever
      // (common here: robust slack rows with equal normals).
      if (!working.empty()) {
        const Vector a_r = qp.constraints.row(blocker).transpose();
        const Matrix basis = a_w.transpose();  // n x k
        const Vector lambda = basis.colPivHouseholderQr().solve(a_r);
        if ((basis * lambda - a_r).norm() <= 1e-10 * (1.0 + a_r.norm())) {
          int leave = -1;
          double heaviest = 1e-12;
          for (size_t i = 0; i < working.size(); ++i) {
            if (std::abs(lambda[static_cast<int>(i)]) > heaviest) {
              heaviest = std::abs(lambda[static_cast<int>(i)]);
              leave = static_cast<int>(i);
            }
          }
          if (leave >= 0) working.erase(working.begin() + leave);
        }
      }
      working.push_back(blocker);
    }
  }
  throw std::runtime_error("qp_solve: active-set iteration limit reached");
}

// Solves a program whose rows all have distinct normals.
QpResult solve_unique(const QpProblem& qp, const QpSettings& settings) {
  const int n = static_cast<int>(qp.hessian.rows());
  const int m = static_cast<int>(qp.constraints.rows());
  const Vector x0 = Vector::Zero(n);
  const double start_violation = m > 0 ? (-qp.bounds).maxCoeff() : 0.0;
  if (start_violation <= settings.tol) return active_set(qp, x0, settings);

  // Elastic phase 1: minimize with one slack variable t >= max violation.
  const double big =
      1e6 * (1.0 + qp.gradient.cwiseAbs().maxCoeff() + qp.hessian.cwiseAbs().maxCoeff());
  QpProblem elastic;
  elastic.hessian = Matrix::Zero(n + 1, n + 1);
  elastic.hessian.topLeftCorner(n, n) = qp.hessian;
  elastic.hessian(n, n) = 1e-6 * big;
  elastic.gradient = Vector::Zero(n + 1);
  elastic.gradient.head(n) = qp.gradient;
  elastic.gradient[n] = big;
  elastic.constraints = Matrix::Zero(m + 1, n + 1);
  elastic.constraints.topLeftCorner(m, n) = qp.constraints;
  elastic.constraints.col(n).head(m).setConstant(-1.0);
  elastic.constraints(m, n) = -1.0;  // t >= 0
  elastic.bounds = Vector::Zero(m + 1);
  elastic.bounds.head(m) = qp.bounds;

  Vector start = Vector::Zero(n + 1);
  start[n] = start_violation + 1.0;
  QpResult relaxed = active_set(elastic, start, settings);
  const double slack = relaxed.x[n];
  const double scale = 1.0 + qp.bounds.cwiseAbs().maxCoeff();
  if (slack > 1e3 * settings.tol * scale) {
    QpResult result;
    result.x = relaxed.x.head(n);
    result.multipliers = relaxed.multipliers.head(m);
    result.converged = relaxed.converged;
    result.infeasible = true;
    result.iterations = relaxed.iterations;
    return result;
  }
  // Feasible after all: polish with the original program from the relaxed point.
  QpResult result = active_set(qp, relaxed.x.head(n), settings);
  result.iterations += relaxed.iterations;
  return result;
}

}  // namespace

QpResult qp_solve(const QpProblem& qp, const QpSettings& settings) {
  const int n = static_cast<int>(qp.hessian.rows());
  const int m = static_cast<int>(qp.constraints.rows());
  if (qp.hessian.cols() != n || qp.gradient.size() != n)
    throw std::invalid_argument("qp_solve: inconsistent Hessian/gradient");
  if (qp.constraints.cols() != (m > 0 ? n : qp.constraints.cols()) || qp.bounds.size() != m)
    throw std::invalid_argument("qp_solve: inconsistent constraint block");

  // Rows sharing one normal collapse to their tightest bound; duplicates (the
  // robust slack pairs produce them whenever a block is linear) otherwise
  // drive the active set into add/drop cycles.
  std::vector<int> keep;       // kept row -> original row carrying the tightest bound
  std::vector<int> group(m);   // original row -> kept position
  for (int i = 0; i < m; ++i) {
    int found = -1;
    for (std::size_t k = 0; k < keep.size() && found < 0; ++k) {
      if ((qp.constraints.row(i) - qp.constraints.row(keep[k])).norm() <=
          1e-12 * (1.0 + qp.constraints.row(keep[k]).norm())) {
        found = static_cast<int>(k);
      }
    }
    if (found < 0) {
      group[i] = static_cast<int>(keep.size());
      keep.push_back(i);
    } else {
      group[i] = found;
      if (qp.bounds[i] < qp.bounds[keep[found]]) keep[found] = i;
    }
  }
  if (static_cast<int>(keep.size()) == m) return solve_unique(qp, settings);

  QpProblem unique;
  unique.hessian = qp.hessian;
  unique.gradient = qp.gradient;
  unique.constraints.resize(static_cast<int>(keep.size()), n);
  unique.bounds.resize(static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    unique.constraints.row(static_cast<int>(k)) = qp.constraints.row(keep[k]);
    unique.bounds[static_cast<int>(k)] = qp.bounds[keep[k]];
  }
  QpResult reduced = solve_unique(unique, settings);
  Vector multipliers = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (keep[group[i]] == i) multipliers[i] = reduced.multipliers[group[i]];
  }
  reduced.multipliers = std::move(multipliers);
  return reduced;
}

}  // namespace magshape
