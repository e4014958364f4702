#include "magshape/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace magshape {
namespace {

using json = nlohmann::ordered_json;

/// Shortest exact decimal for a double; keeps CSV reruns byte-identical.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

std::string format_report_json(const RunReport& report) {
  json j;
  j["problem"] = report.problem;
  j["parametrization"] = report.parametrization;
  j["optimizer"] = report.optimizer;
  j["robust"] = report.robust;
  if (report.robust) j["robust_delta"] = vector_json(report.robust_delta);
  j["status"] = report.result.status;
  j["converged"] = report.result.converged;
  j["iterations"] = report.result.iterations;
  j["minimizer"] = vector_json(report.result.minimizer);
  j["minimum"] = report.result.minimum;
  if (report.result.multipliers.size() > 0) {
    j["multipliers"] = vector_json(report.result.multipliers);
  }
  j["ledger"] = {{"objective_evals", report.ledger.objective_evals},
                 {"gradient_evals", report.ledger.gradient_evals},
                 {"constraint_evals", report.ledger.constraint_evals},
                 {"fe_solves", report.ledger.fe_solves},
                 {"fe_backsolves", report.ledger.fe_backsolves}};
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2) + "\n";
}

std::string format_convergence_csv(const OptimizeResult& result) {
  std::ostringstream out;
  out << "iteration,best_objective,stationarity,step,objective_evals,fe_solves,fe_backsolves\n";
  for (const IterationRecord& r : result.history) {
    out << r.iteration << ',' << num(r.best_objective) << ',' << num(r.stationarity) << ','
        << num(r.step) << ',' << r.objective_evals << ',' << r.fe_solves << ','
        << r.fe_backsolves << '\n';
  }
  return out.str();
}

std::string format_field_csv(const FieldEvaluation& eval) {
  std::ostringstream out;
  out << "node,x_m,y_m,a_wb\n";
  for (int i = 0; i < eval.nodes.rows(); ++i) {
    out << i << ',' << num(eval.nodes(i, 0)) << ',' << num(eval.nodes(i, 1)) << ','
        << num(eval.dofs[i]) << '\n';
  }
  return out.str();
}

std::string format_samples_csv(const FieldEvaluation& eval,
                               const std::vector<FluxTarget>& targets) {
  if (eval.fluxes.size() != targets.size()) {
    throw std::invalid_argument("samples: flux/target count mismatch");
  }
  std::ostringstream out;
  out << "sample,x_m,y_m,bx_tesla,by_tesla,goal_bx_tesla,goal_by_tesla\n";
  for (std::size_t k = 0; k < targets.size(); ++k) {
    out << k << ',' << num(targets[k].location.x()) << ',' << num(targets[k].location.y()) << ','
        << num(eval.fluxes[k].x()) << ',' << num(eval.fluxes[k].y()) << ','
        << num(targets[k].goal.x()) << ',' << num(targets[k].goal.y()) << '\n';
  }
  return out.str();
}

std::string format_compare_table(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("compare: no reports");
  for (const RunReport& r : reports) {
    if (r.problem != reports.front().problem) {
      throw std::invalid_argument("compare: reports mix problems '" + reports.front().problem +
                                  "' and '" + r.problem + "'");
    }
  }
  std::ostringstream out;
  out << "problem: " << reports.front().problem << "\n\n";
  out << std::left << std::setw(28) << "method" << std::right << std::setw(14) << "minimum"
      << std::setw(7) << "iters" << std::setw(7) << "evals" << std::setw(7) << "grads"
      << std::setw(8) << "solves" << std::setw(11) << "backsolves" << std::setw(9) << "wall_s"
      << "  minimizer\n";
  for (const RunReport& r : reports) {
    std::string method = r.optimizer + "/" + r.parametrization;
    if (r.robust) method += "/robust";
    std::ostringstream point;
    point << '(';
    for (int i = 0; i < r.result.minimizer.size(); ++i) {
      if (i) point << ", ";
      point << std::setprecision(6) << r.result.minimizer[i];
    }
    point << ')';
    out << std::left << std::setw(28) << method << std::right << std::setw(14)
        << std::setprecision(6) << std::scientific << r.result.minimum << std::defaultfloat
        << std::setw(7) << r.result.iterations << std::setw(7) << r.ledger.objective_evals
        << std::setw(7) << r.ledger.gradient_evals << std::setw(8) << r.ledger.fe_solves
        << std::setw(11) << r.ledger.fe_backsolves << std::setw(9) << std::setprecision(2)
        << std::fixed << r.wall_seconds << std::defaultfloat << "  " << point.str() << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

}  // namespace magshape
