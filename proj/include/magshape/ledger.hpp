#pragma once

#include <cstdint>

namespace magshape {

/// Call accounting shared by objectives, gradients and the FE solver.
/// fe_solves counts full solves (new matrix: assemble + factorize + solve);
/// fe_backsolves counts extra right-hand sides pushed through an existing
/// factorization (sensitivity solves).
struct SolveLedger {
  std::int64_t objective_evals = 0;
  std::int64_t gradient_evals = 0;
  std::int64_t constraint_evals = 0;
  std::int64_t fe_solves = 0;
  std::int64_t fe_backsolves = 0;

  void reset() { *this = SolveLedger{}; }
};

}  // namespace magshape
