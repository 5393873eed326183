// Dense phase-one simplex for small feasibility problems {x >= 0 : A x = b}.
#pragma once

#include "contextua/opalg.hpp"

namespace contextua::lp {

struct FeasibilityResult {
  bool feasible = false;
  /// Primal point when feasible.
  RealVector x;
  /// Farkas multipliers: when infeasible, y^T A <= 0 componentwise and
  /// y^T b = infeasibility > 0.
  RealVector y;
  /// Optimal sum of artificial variables.
  double infeasibility = 0.0;
  std::size_t pivots = 0;
};

/// Bland's rule throughout, so the method terminates on degenerate problems.
FeasibilityResult solve_feasibility(const RealMatrix& a, const RealVector& b, double tol = 1e-9);

}  // namespace contextua::lp
