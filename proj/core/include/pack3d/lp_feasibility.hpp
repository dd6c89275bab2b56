#pragma once

#include <span>
#include <vector>

namespace pack3d {

/// Dense row-major equality system A f = b with f >= 0.
struct LinearSystem {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // rows * cols
  std::vector<double> b;  // rows

  double& at(int r, int c) {
    return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
             static_cast<std::size_t>(c)];
  }
};

struct LpFeasibility {
  bool feasible = false;
  double infeasibility = 0.0;  // smallest |A f - b|_1 seen over iterates f >= 0
  int iterations = 0;
};

/// Phase-one LP solved by a primal-dual interior-point method (Mehrotra
/// predictor-corrector, sparse normal equations). Feasible iff some iterate
/// f >= 0 satisfies |A f - b|_1 <= `tolerance` times max(1, sum of |b|),
/// checked against the original system. Throws SolverFailure if the normal
/// equations cannot be factored.
LpFeasibility solve_feasibility(const LinearSystem& system, double tolerance = 1e-9);

}  // namespace pack3d
