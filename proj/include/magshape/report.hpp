#pragma once

#include <string>
#include <vector>

#include "magshape/config.hpp"

namespace magshape {

/// Everything a finished run wants to tell the outside world.
struct RunReport {
  std::string problem;
  std::string parametrization;
  std::string optimizer;
  bool robust = false;
  Vector robust_delta;
  OptimizeResult result;
  SolveLedger ledger;
  double wall_seconds = 0.0;  // informational only, never in CSV output
};

/// JSON summary of a run (minimizer, objective, ledger, timings).
[[nodiscard]] std::string format_report_json(const RunReport& report);

/// Per-iteration history as CSV. Reruns with one seed are byte-identical.
[[nodiscard]] std::string format_convergence_csv(const OptimizeResult& result);

/// Nodal solution table: node id, position (m), vector potential (Wb).
[[nodiscard]] std::string format_field_csv(const FieldEvaluation& eval);

/// Flux samples against their goals (T).
[[nodiscard]] std::string format_samples_csv(const FieldEvaluation& eval,
                                             const std::vector<FluxTarget>& targets);

/// Side-by-side table for runs of one problem; mixed problems are an error.
[[nodiscard]] std::string format_compare_table(const std::vector<RunReport>& reports);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace magshape
