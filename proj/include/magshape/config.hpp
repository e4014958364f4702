#pragma once

#include <memory>
#include <string>
#include <vector>

#include "magshape/die_press.hpp"
#include "magshape/pmsm.hpp"
#include "magshape/robust.hpp"

namespace magshape {

/// Fully data-driven field problem: mesh from a file plus materials, boundary
/// values, flux targets, and one parametrization (design elements or affine
/// subdomains).
struct CustomProblemConfig {
  std::string mesh_path;
  RegionMap regions;
  DirichletSpec boundary;
  double length = 1.0;
  std::vector<FluxTarget> targets;
  bool mean = false;
  SolveMethod method = SolveMethod::Direct;
  std::vector<DesignElement> elements;      // design_element parametrization
  std::vector<AffineSubdomain> subdomains;  // affine parametrization
  BoxBounds box;
  Vector reference;
};

/// One optimization run: problem selection plus solver and robustness knobs.
/// Parsed from a versioned JSON document with unit-suffixed keys.
struct RunConfig {
  std::string problem = "die_press";  // die_press | pmsm_synthetic | custom
  std::string parametrization = "design_element";  // design_element | affine
  std::string optimizer = "sqp";                   // sqp | pso
  SqpSettings sqp;
  PsoSettings pso;
  bool robust = false;
  Vector robust_delta;  // uncertainty radii, parameter units
  std::string output_dir = "out";
  DiePressConfig die_press;
  SizingConfig pmsm;
  CustomProblemConfig custom;
};

/// Parses and validates a config document. Unknown keys, malformed values,
/// and inconsistent selections throw std::invalid_argument with a field path.
/// Relative mesh paths resolve against `base_dir`.
[[nodiscard]] RunConfig parse_run_config(const std::string& json_text,
                                         const std::string& base_dir = "");
[[nodiscard]] RunConfig load_run_config(const std::string& path);
[[nodiscard]] std::string format_run_config(const RunConfig& config);

/// A run-ready problem pair: `smooth` carries gradients (SQP, robust
/// counterpart); `search` is what swarm search sees (penalized objective for
/// the synthetic sizing problem, identical otherwise).
struct BuiltProblem {
  std::shared_ptr<const FieldProblem> field;  // null for pmsm_synthetic
  OptimizationProblem smooth;
  OptimizationProblem search;
  int robust_base_dim = 0;  // >0: smooth is a slack expansion; minimizer = z.head(dim)
};

[[nodiscard]] BuiltProblem build_problem(const RunConfig& config, SolveLedger* ledger);

}  // namespace magshape
