#pragma once

// Best-first branch-and-bound over the binary variables of a MilpModel.
//
// Every node reuses one Simplex instance: switching nodes only changes binary
// bounds, which keeps the basis dual feasible, so nodes are re-solved by the
// dual simplex without refactoring.

#include <functional>

#include "fcuc/milp/model.hpp"
#include "fcuc/milp/simplex.hpp"

namespace fcuc::milp {

struct BnbOptions {
  double rel_gap = 1e-6;
  double abs_gap = 1e-9;
  double time_limit_seconds = 1e30;
  long node_limit = 10'000'000;
  double integrality_tol = 1e-6;
  bool dive = true;  // depth-first plunge after each branching
  SimplexOptions lp;
  // Called on each new incumbent with (objective, node count).
  std::function<void(double, long)> on_incumbent;
};

// Throws std::logic_error if the returned objective falls below the root bound.
[[nodiscard]] SolveResult bnb_solve(const MilpModel& model, const BnbOptions& opts = {});

}  // namespace fcuc::milp
