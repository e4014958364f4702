#include "magshape/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "magshape/mesh.hpp"
#include "magshape/qp.hpp"
#include "magshape/rng.hpp"

namespace magshape {

double OptimizationProblem::eval_objective(const Vector& p) const {
  if (ledger) ledger->objective_evals += 1;
  return objective(p);
}

Vector OptimizationProblem::eval_gradient(const Vector& p) const {
  if (!gradient) throw std::runtime_error("OptimizationProblem: no gradient available");
  if (ledger) ledger->gradient_evals += 1;
  return gradient(p);
}

Vector OptimizationProblem::eval_constraints(const Vector& p) const {
  if (ledger) ledger->constraint_evals += 1;
  return constraints.evaluate(p);
}

Matrix OptimizationProblem::eval_constraint_gradients(const Vector& p) const {
  return constraints.gradients(p);
}

namespace {

double violation(const Vector& g) {
  double v = 0.0;
  for (int i = 0; i < g.size(); ++i) v += std::max(0.0, g[i]);
  return v;
}

IterationRecord snapshot(int iteration, double best, double stat, double step,
                         const SolveLedger* ledger) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.best_objective = best;
  rec.stationarity = stat;
  rec.step = step;
  if (ledger) {
    rec.objective_evals = ledger->objective_evals;
    rec.fe_solves = ledger->fe_solves;
    rec.fe_backsolves = ledger->fe_backsolves;
  }
  return rec;
}

}  // namespace

OptimizeResult sqp_solve(const OptimizationProblem& problem, const SqpSettings& settings) {
  if (!problem.gradient) throw std::invalid_argument("sqp_solve: problem has no gradient");
  const int n = problem.dim();

  Vector x = problem.constraints.box.lower.size() == n
                 ? project_to_box(problem.initial, problem.constraints.box)
                 : problem.initial;
  double f = problem.eval_objective(x);
  Vector grad = problem.eval_gradient(x);
  Vector g = problem.eval_constraints(x);
  Matrix gg = problem.eval_constraint_gradients(x);
  const int m = static_cast<int>(g.size());

  // Quasi-Newton model: problem-supplied curvature when available (made
  // safely positive definite), otherwise identity rescaled after the first
  // step (Shanno-Phua) so its unit matches the problem.
  Matrix hess = Matrix::Identity(n, n);
  bool hess_scaled = false;
  if (problem.initial_hessian) {
    Matrix h0 = problem.initial_hessian(x);
    h0 = 0.5 * (h0 + h0.transpose());
    hess = h0 + (1e-10 * (1.0 + h0.trace() / n)) * Matrix::Identity(n, n);
    hess_scaled = true;
  }
  double rho = 1.0;
  OptimizeResult result;
  result.minimizer = x;
  result.minimum = f;
  result.multipliers = Vector::Zero(m);
  result.status = "max_iterations";

  for (int it = 1; it <= settings.max_iterations; ++it) {
    result.iterations = it;

    QpProblem qp;
    qp.hessian = hess;
    qp.gradient = grad;
    qp.constraints = gg;
    qp.bounds = -g;
    const QpResult sub = qp_solve(qp);
    const Vector d = sub.x;
    const Vector lam = sub.multipliers;

    double kkt = (grad + gg.transpose() * lam).lpNorm<Eigen::Infinity>();
    for (int i = 0; i < m; ++i) {
      kkt = std::max(kkt, std::max(0.0, g[i]));
      kkt = std::max(kkt, std::abs(lam[i] * g[i]));
    }
    result.history.push_back(snapshot(it, f, kkt, d.norm(), problem.ledger));
    if (kkt <= settings.kkt_tol) {
      result.minimizer = x;
      result.minimum = f;
      result.multipliers = lam;
      result.converged = true;
      result.status = "kkt";
      return result;
    }

    rho = std::max(rho, settings.merit_growth * (m > 0 ? lam.lpNorm<Eigen::Infinity>() : 0.0));
    const double phi0 = f + rho * violation(g);
    const double dir = grad.dot(d) - rho * violation(g);

    // Merit value at a trial step; invalid geometry counts as +inf.
    double trial_f = 0.0;
    Vector trial_g;
    auto merit_at = [&](double alpha) {
      const Vector xt = x + alpha * d;
      try {
        trial_f = problem.eval_objective(xt);
        trial_g = problem.eval_constraints(xt);
      } catch (const InvalidGeometry&) {
        return std::numeric_limits<double>::infinity();
      }
      if (!std::isfinite(trial_f)) return std::numeric_limits<double>::infinity();
      return trial_f + rho * violation(trial_g);
    };

    // Try the full step, then the quadratic-interpolation step (exact on
    // quadratic objectives), then halving.
    double alpha = 1.0;
    double phi1 = merit_at(1.0);
    bool accepted = false;
    double best_alpha = 1.0, best_phi = phi1, best_f = trial_f;
    Vector best_g = trial_g;
    const double curvature = phi1 - phi0 - dir;
    if (std::isfinite(phi1) && curvature > 0.0) {
      const double interp = std::clamp(-dir / (2.0 * curvature), 0.01, 1.0);
      if (interp < 1.0 - 1e-12) {
        const double phi_i = merit_at(interp);
        if (phi_i < best_phi) {
          best_alpha = interp;
          best_phi = phi_i;
          best_f = trial_f;
          best_g = trial_g;
        }
      }
    }
    if (best_phi <= phi0 + settings.armijo_c * best_alpha * dir) {
      alpha = best_alpha;
      phi1 = best_phi;
      trial_f = best_f;
      trial_g = best_g;
      accepted = true;
    } else {
      alpha = 0.5 * best_alpha;
      for (int h = 0; h < settings.max_halvings; ++h, alpha *= 0.5) {
        phi1 = merit_at(alpha);
        if (phi1 <= phi0 + settings.armijo_c * alpha * dir) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      result.minimizer = x;
      result.minimum = f;
      result.multipliers = lam;
      result.status = "line_search_failure";
      return result;
    }

    const Vector x_new = x + alpha * d;
    const Vector grad_new = problem.eval_gradient(x_new);
    const Matrix gg_new = problem.eval_constraint_gradients(x_new);

    // Damped BFGS on the Lagrangian gradient change. Before the first update
    // the identity is rescaled to the measured curvature along the first step
    // so the unit of the approximation matches the problem.
    const Vector s = x_new - x;
    Vector y = (grad_new + gg_new.transpose() * lam) - (grad + gg.transpose() * lam);
    if (!hess_scaled) {
      const double sy0 = s.dot(y);
      const double yy = y.squaredNorm();
      if (sy0 > 1e-30 && yy > 0.0) hess *= yy / sy0;
      hess_scaled = true;
    }
    const Vector hs = hess * s;
    const double shs = s.dot(hs);
    double sy = s.dot(y);
    if (shs > 1e-30) {
      if (sy < settings.bfgs_damping * shs) {
        const double tau = (1.0 - settings.bfgs_damping) * shs / (shs - sy);
        y = tau * y + (1.0 - tau) * hs;
        sy = s.dot(y);
      }
      if (sy > 1e-30) hess += y * y.transpose() / sy - hs * hs.transpose() / shs;
    }

    x = x_new;
    f = trial_f;
    g = trial_g;
    grad = grad_new;
    gg = gg_new;
    result.minimizer = x;
    result.minimum = f;
    result.multipliers = lam;

    if (s.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      result.status = "step_tolerance";
      return result;
    }
  }
  return result;
}

namespace {

// Squared distance from x to the convex hull of `points` (distance program
// over the simplex, solved with the active-set QP).
double hull_distance_sq(const std::deque<Vector>& points, const Vector& x) {
  const int k = static_cast<int>(points.size());
  const int n = static_cast<int>(x.size());
  Matrix pts(n, k);
  for (int j = 0; j < k; ++j) pts.col(j) = points[j];
  QpProblem qp;
  qp.hessian = pts.transpose() * pts + 1e-12 * Matrix::Identity(k, k);
  qp.gradient = -pts.transpose() * x;
  qp.constraints = Matrix::Zero(k + 2, k);
  qp.constraints.topLeftCorner(k, k) = -Matrix::Identity(k, k);
  qp.constraints.row(k).setConstant(1.0);
  qp.constraints.row(k + 1).setConstant(-1.0);
  qp.bounds = Vector::Zero(k + 2);
  qp.bounds[k] = 1.0;
  qp.bounds[k + 1] = -1.0;
  const QpResult sol = qp_solve(qp);
  if (!sol.converged || sol.infeasible) return std::numeric_limits<double>::infinity();
  return (pts * sol.x - x).squaredNorm();
}

}  // namespace

OptimizeResult pso_solve(const OptimizationProblem& problem, const PsoSettings& settings) {
  const int n = problem.dim();
  const BoxBounds& box = problem.constraints.box;
  if (box.dim() != n || !box.is_finite())
    throw std::invalid_argument("pso_solve: particle swarm needs a finite box");
  if (settings.swarm < 1) throw std::invalid_argument("pso_solve: swarm must be positive");

  Rng rng(settings.seed);
  const double diameter = (box.upper - box.lower).norm();
  std::deque<Vector> cleared;  // recent points that passed every constraint row

  auto row_value = [&](const Constraint& c, const Vector& x) {
    if (problem.ledger) problem.ledger->constraint_evals += 1;
    return c.value(x);
  };
  auto feasible = [&](const Vector& x) {
    for (const auto& c : problem.constraints.nonlinear)
      if (!c.expensive && row_value(c, x) > 0.0) return false;
    bool checked_everything = true;
    bool skip = false;
    if (settings.hull_skip && static_cast<int>(cleared.size()) >= n + 1)
      skip = hull_distance_sq(cleared, x) <= 1e-18 * diameter * diameter;
    for (const auto& c : problem.constraints.nonlinear) {
      if (!c.expensive) continue;
      if (skip) {
        checked_everything = false;
        continue;
      }
      if (row_value(c, x) > 0.0) return false;
    }
    if (settings.hull_skip && checked_everything) {
      cleared.push_back(x);
      if (static_cast<int>(cleared.size()) > settings.hull_capacity) cleared.pop_front();
    }
    return true;
  };
  auto objective_or_inf = [&](const Vector& x) {
    try {
      const double v = problem.eval_objective(x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const InvalidGeometry&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const int q_count = settings.swarm;
  Matrix pos(q_count, n);
  Matrix vel = Matrix::Zero(q_count, n);
  Matrix best_pos(q_count, n);
  Vector best_val(q_count);

  for (int q = 0; q < q_count; ++q) {
    bool placed = false;
    for (int attempt = 0; attempt < 10 * q_count && !placed; ++attempt) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(box.lower[i], box.upper[i]);
      if (!feasible(x)) continue;
      const double v = objective_or_inf(x);
      if (!std::isfinite(v)) continue;
      pos.row(q) = x.transpose();
      best_pos.row(q) = x.transpose();
      best_val[q] = v;
      placed = true;
    }
    if (!placed)
      throw std::runtime_error("pso_solve: found no feasible particle (empty admissible set?)");
  }

  int swarm_best = 0;
  for (int q = 1; q < q_count; ++q)
    if (best_val[q] < best_val[swarm_best]) swarm_best = q;

  OptimizeResult result;
  result.status = "max_iterations";
  int stall = 0;
  for (int it = 1; it <= settings.max_iterations; ++it) {
    result.iterations = it;
    const Vector gbest = best_pos.row(swarm_best).transpose();
    for (int q = 0; q < q_count; ++q) {
      Vector n1(n), n2(n);
      for (int i = 0; i < n; ++i) n1[i] = rng.uniform();
      for (int i = 0; i < n; ++i) n2[i] = rng.uniform();
      for (int i = 0; i < n; ++i) {
        vel(q, i) = settings.inertia * vel(q, i) +
                    settings.cognitive * n1[i] * (best_pos(q, i) - pos(q, i)) +
                    settings.social * n2[i] * (gbest[i] - pos(q, i));
      }
      const Vector x = project_to_box((pos.row(q) + vel.row(q)).transpose(), box);
      pos.row(q) = x.transpose();
      if (!feasible(x)) continue;
      const double v = objective_or_inf(x);
      if (v < best_val[q]) {
        best_val[q] = v;
        best_pos.row(q) = x.transpose();
      }
    }
    const int prev_best = swarm_best;
    const double prev_val = best_val[prev_best];
    for (int q = 0; q < q_count; ++q)
      if (best_val[q] < best_val[swarm_best]) swarm_best = q;
    stall = (best_val[swarm_best] < prev_val) ? 0 : stall + 1;

    double spread = 0.0;
    for (int q = 0; q < q_count; ++q)
      spread += (best_pos.row(swarm_best) - pos.row(q)).norm();
    spread /= q_count;

    result.history.push_back(
        snapshot(it, best_val[swarm_best], spread, static_cast<double>(stall), problem.ledger));

    if (spread < settings.cluster_tol) {
      result.converged = true;
      result.status = "clustered";
      break;
    }
    if (stall >= settings.stall_limit) {
      result.converged = true;
      result.status = "stalled";
      break;
    }
  }

  result.minimizer = best_pos.row(swarm_best).transpose();
  result.minimum = best_val[swarm_best];
  return result;
}

}  // namespace magshape
