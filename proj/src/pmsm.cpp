#include "magshape/pmsm.hpp"

#include <algorithm>
#include <cmath>

namespace magshape {

double sizing_emf(const SizingConfig& config, const Vector& p) {
  return config.emf_width * p[0] + config.emf_height * p[1];
}

OptimizationProblem sizing_problem(const SizingConfig& config, SolveLedger* ledger) {
  OptimizationProblem out;
  out.objective = [](const Vector& p) { return p[0] * p[1]; };
  out.gradient = [](const Vector& p) {
    Vector g(3);
    g << p[1], p[0], 0.0;
    return g;
  };
  out.constraints.box = BoxBounds{config.lower, config.upper};

  Constraint ring;
  ring.name = "ring_fit";
  ring.value = [config](const Vector& p) { return p[1] + p[2] - config.ring_limit; };
  ring.gradient = [](const Vector&) { return (Vector(3) << 0.0, 1.0, 1.0).finished(); };
  out.constraints.nonlinear.push_back(std::move(ring));

  Constraint bar;
  bar.name = "bar_fit";
  bar.value = [config](const Vector& p) { return 3.0 * p[0] - 2.0 * p[2] - config.bar_limit; };
  bar.gradient = [](const Vector&) { return (Vector(3) << 3.0, 0.0, -2.0).finished(); };
  out.constraints.nonlinear.push_back(std::move(bar));

  Constraint emf;
  emf.name = "emf_demand";
  emf.value = [config](const Vector& p) { return config.emf_required - sizing_emf(config, p); };
  emf.gradient = [config](const Vector&) {
    return (Vector(3) << -config.emf_width, -config.emf_height, 0.0).finished();
  };
  emf.expensive = true;
  out.constraints.nonlinear.push_back(std::move(emf));

  out.initial = config.initial;
  out.ledger = ledger;
  return out;
}

// Steep even for tiny violations (t = 1e-3 already costs ~6.4), yet growing
// slowly enough that far-out particles still see a usable slope.
double violation_penalty(double t) {
  if (t <= 0.0) return 0.0;
  return std::exp(4.0 * std::pow(t, 0.1)) - 1.0;
}

OptimizationProblem sizing_problem_penalized(const SizingConfig& config, SolveLedger* ledger) {
  OptimizationProblem out;
  out.objective = [config](const Vector& p) {
    // The voltage term always contributes. Skipping it when a geometric check
    // already fails sounds like a saving, but a swarm then parks particles an
    // epsilon past a cheap bound where the skipped term would dominate, and
    // that hole becomes the global minimum of the search landscape.
    const double ring = violation_penalty(p[1] + p[2] - config.ring_limit);
    const double bar = violation_penalty(3.0 * p[0] - 2.0 * p[2] - config.bar_limit);
    const double emf = violation_penalty(config.emf_required - sizing_emf(config, p));
    const double factor = 1.0 + 2.0 * (ring + bar + emf);
    return p[0] * p[1] * factor;
  };
  out.constraints = ConstraintSet::box_only(BoxBounds{config.lower, config.swarm_upper});
  out.initial = config.initial;
  out.ledger = ledger;
  return out;
}

}  // namespace magshape
