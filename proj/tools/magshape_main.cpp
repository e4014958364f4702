// Command-line front end: field solves, optimization runs, gradient checks,
// grid sweeps and side-by-side comparisons, all driven by JSON run configs.
//
// Exit codes: 0 success, 2 config error, 3 non-convergence, 4 invalid geometry.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "magshape/config.hpp"
#include "magshape/report.hpp"

namespace {

using namespace magshape;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNoConvergence = 3;
constexpr int kBadGeometry = 4;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_field_outputs(const BuiltProblem& built, const Vector& p, SolveLedger* ledger,
                         const std::filesystem::path& dir) {
  if (!built.field) return;
  const FieldEvaluation eval = built.field->evaluate(p, ledger);
  write_text_file((dir / "field.csv").string(), format_field_csv(eval));
  if (!built.field->config().targets.empty()) {
    write_text_file((dir / "samples.csv").string(),
                    format_samples_csv(eval, built.field->config().targets));
  }
}

RunReport describe(const RunConfig& config, OptimizeResult result, const SolveLedger& ledger,
                   double wall) {
  RunReport report;
  report.problem = config.problem;
  report.parametrization = config.parametrization;
  report.optimizer = config.optimizer;
  report.robust = config.robust;
  report.robust_delta = config.robust_delta;
  report.result = std::move(result);
  report.ledger = ledger;
  report.wall_seconds = wall;
  return report;
}

/// Build + optimize one config; used by `optimize` and `compare`.
RunReport run_one(const RunConfig& config, BuiltProblem* built_out, SolveLedger* ledger) {
  BuiltProblem built = build_problem(config, ledger);
  const auto t0 = std::chrono::steady_clock::now();
  OptimizeResult result = config.optimizer == "sqp" ? sqp_solve(built.smooth, config.sqp)
                                                    : pso_solve(built.search, config.pso);
  const double wall = seconds_since(t0);
  if (built.robust_base_dim > 0) {
    result.minimizer = result.minimizer.head(built.robust_base_dim).eval();
  }
  if (built_out) *built_out = std::move(built);
  return describe(config, std::move(result), *ledger, wall);
}

int cmd_solve(const std::string& config_path) {
  const RunConfig config = load_run_config(config_path);
  SolveLedger ledger;
  const BuiltProblem built = build_problem(config, &ledger);
  if (!built.field) {
    throw std::invalid_argument("config: solve needs a field problem; '" + config.problem +
                                "' has no field model");
  }
  const Vector p = built.search.initial;  // nominal design, pre-robust dimensions
  const auto t0 = std::chrono::steady_clock::now();
  const FieldEvaluation eval = built.field->evaluate(p, &ledger);
  const double wall = seconds_since(t0);

  const std::filesystem::path dir(config.output_dir);
  write_field_outputs(built, p, &ledger, dir);
  OptimizeResult result;
  result.minimizer = p;
  result.minimum = eval.objective;
  result.converged = true;
  result.status = "solved";
  RunConfig annotated = config;
  annotated.optimizer = "none";
  write_text_file((dir / "report.json").string(),
                  format_report_json(describe(annotated, std::move(result), ledger, wall)));
  std::cout << "objective " << eval.objective << " at the initial design; outputs in "
            << dir.string() << "\n";
  return kOk;
}

int cmd_optimize(const std::string& config_path) {
  const RunConfig config = load_run_config(config_path);
  SolveLedger ledger;
  BuiltProblem built;
  RunReport report = run_one(config, &built, &ledger);

  const std::filesystem::path dir(config.output_dir);
  write_field_outputs(built, report.result.minimizer, &ledger, dir);
  report.ledger = ledger;  // include the reporting solve
  write_text_file((dir / "report.json").string(), format_report_json(report));
  write_text_file((dir / "convergence.csv").string(), format_convergence_csv(report.result));

  std::ostringstream point;
  for (int i = 0; i < report.result.minimizer.size(); ++i) {
    point << (i ? ", " : "") << report.result.minimizer[i];
  }
  std::cout << report.optimizer << " " << report.result.status << " after "
            << report.result.iterations << " iterations: objective " << report.result.minimum
            << " at (" << point.str() << "); outputs in " << dir.string() << "\n";
  return report.result.converged ? kOk : kNoConvergence;
}

int cmd_check_grad(const std::string& config_path, int extra_points, std::uint64_t seed,
                   double tol) {
  RunConfig config = load_run_config(config_path);
  config.robust = false;  // the check targets the nominal, smooth objective
  SolveLedger ledger;
  const BuiltProblem built = build_problem(config, &ledger);
  const BoxBounds& box = built.search.constraints.box;

  std::vector<Vector> points{built.smooth.initial};
  if (extra_points > 0) {
    if (!box.is_finite()) {
      throw std::invalid_argument("config: check-grad sampling needs a finite box");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> interior(0.1, 0.9);
    for (int k = 0; k < extra_points; ++k) {
      Vector p(box.dim());
      for (int i = 0; i < box.dim(); ++i) {
        p[i] = box.lower[i] + interior(rng) * (box.upper[i] - box.lower[i]);
      }
      points.push_back(std::move(p));
    }
  }

  bool ok = true;
  std::printf("%-6s %-14s %-10s %s\n", "point", "rel_error", "fe_solves", "design");
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vector& x = points[k];
    const std::int64_t solves0 = ledger.fe_solves;
    const Vector grad = built.smooth.eval_gradient(x);
    Vector fd(x.size());
    for (int i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (built.smooth.eval_objective(xp) - built.smooth.eval_objective(xm)) / (2.0 * h);
    }
    const double scale = std::max(grad.lpNorm<Eigen::Infinity>(), 1e-30);
    const double rel = (fd - grad).lpNorm<Eigen::Infinity>() / scale;
    ok = ok && rel <= tol;
    std::ostringstream point;
    for (int i = 0; i < x.size(); ++i) point << (i ? ", " : "") << x[i];
    std::printf("%-6zu %-14.3e %-10lld (%s)\n", k, rel,
                static_cast<long long>(ledger.fe_solves - solves0), point.str().c_str());
  }
  std::printf("%s (tolerance %.1e)\n", ok ? "PASS" : "FAIL", tol);
  return ok ? kOk : kNoConvergence;
}

int cmd_sweep(const std::string& config_path, int divisions) {
  RunConfig config = load_run_config(config_path);
  config.robust = false;  // the scan covers the nominal design box
  if (divisions < 2) throw std::invalid_argument("sweep: divisions must be at least 2");
  SolveLedger ledger;
  const BuiltProblem built = build_problem(config, &ledger);
  const BoxBounds& box = built.search.constraints.box;
  if (!box.is_finite()) throw std::invalid_argument("config: sweep needs a finite box");

  const int n = box.dim();
  double total = 1.0;
  for (int i = 0; i < n; ++i) total *= divisions;
  if (total > 2e5) throw std::invalid_argument("sweep: grid too large (> 200000 points)");

  std::ostringstream csv;
  for (int i = 0; i < n; ++i) csv << 'p' << (i + 1) << ',';
  csv << "objective\n";
  char buf[32];

  Vector best;
  double best_objective = kInf;
  std::vector<int> index(n, 0);
  const auto grid_value = [&](int i) {
    return box.lower[i] + (box.upper[i] - box.lower[i]) * index[i] / (divisions - 1);
  };
  bool done = false;
  int invalid = 0;
  while (!done) {
    Vector p(n);
    for (int i = 0; i < n; ++i) p[i] = grid_value(i);
    double objective;
    bool valid = true;
    try {
      objective = built.search.eval_objective(p);
    } catch (const InvalidGeometry&) {
      objective = kInf;
      valid = false;
      ++invalid;
    }
    if (valid && built.search.constraints.feasible(p, 1e-9) && objective < best_objective) {
      best_objective = objective;
      best = p;
    }
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", p[i]);
      csv << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", objective);
    csv << buf << '\n';

    done = true;
    for (int i = n - 1; i >= 0; --i) {
      if (++index[i] < divisions) {
        done = false;
        break;
      }
      index[i] = 0;
    }
  }

  const std::filesystem::path dir(config.output_dir);
  write_text_file((dir / "sweep.csv").string(), csv.str());
  if (best.size() == 0) throw std::runtime_error("sweep: no feasible grid point");
  std::ostringstream point;
  for (int i = 0; i < n; ++i) point << (i ? ", " : "") << best[i];
  std::cout << "grid minimum " << best_objective << " at (" << point.str() << ") over "
            << static_cast<long long>(total) << " points";
  if (invalid > 0) std::cout << " (" << invalid << " invalid)";
  std::cout << "; table in " << (dir / "sweep.csv").string() << "\n";
  return kOk;
}

int cmd_compare(const std::vector<std::string>& config_paths) {
  std::vector<RunReport> reports;
  bool all_converged = true;
  for (const std::string& path : config_paths) {
    const RunConfig config = load_run_config(path);
    SolveLedger ledger;
    reports.push_back(run_one(config, nullptr, &ledger));
    all_converged = all_converged && reports.back().result.converged;
  }
  std::cout << format_compare_table(reports);
  return all_converged ? kOk : kNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shape optimization for 2D magnetostatic finite-element models"};
  app.require_subcommand(1);

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "Field solve at the initial design");
  solve->add_option("-c,--config", config_path, "run config (JSON)")->required();

  auto* optimize = app.add_subcommand("optimize", "Run the configured optimizer");
  optimize->add_option("-c,--config", config_path, "run config (JSON)")->required();

  int points = 3;
  std::uint64_t seed = 7;
  double tol = 1e-5;
  auto* check = app.add_subcommand(
      "check-grad", "Compare analytic gradients with central differences (nominal problem)");
  check->add_option("-c,--config", config_path, "run config (JSON)")->required();
  check->add_option("--points", points, "random interior designs beyond the initial one");
  check->add_option("--seed", seed, "sampling seed");
  check->add_option("--tol", tol, "relative error bound");

  int divisions = 5;
  auto* sweep = app.add_subcommand("sweep", "Full-factorial objective scan over the design box");
  sweep->add_option("-c,--config", config_path, "run config (JSON)")->required();
  sweep->add_option("--divisions", divisions, "grid divisions per dimension");

  std::vector<std::string> compare_paths;
  auto* compare = app.add_subcommand("compare", "Run several configs on one problem and tabulate");
  compare->add_option("-c,--config", compare_paths, "run configs (repeat)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (solve->parsed()) return cmd_solve(config_path);
    if (optimize->parsed()) return cmd_optimize(config_path);
    if (check->parsed()) return cmd_check_grad(config_path, points, seed, tol);
    if (sweep->parsed()) return cmd_sweep(config_path, divisions);
    if (compare->parsed()) return cmd_compare(compare_paths);
  } catch (const InvalidGeometry& e) {
    std::cerr << "error: invalid geometry: " << e.what() << "\n";
    return kBadGeometry;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  }
  return kOk;
}
