#pragma once

#include <functional>

#include "lfa/model.hpp"

namespace lfa {

struct CgConfig {
  int max_iterations = 30;      // T_CG
  double rel_tolerance = 1e-2;  // tau: stop once ||r|| <= tau * ||b||
  double abs_floor = 1e-300;    // ||b|| at or below this counts as zero
};

struct CgOutcome {
  FlatVector increment;  // delta y
  int iterations_used = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<FlatVector(const FlatVector&)>;

// Conjugate gradient from x0 = 0 on apply(x) = b; the first search direction
// is b itself, so with b = -g the initial direction is the negative gradient.
// apply must be symmetric positive definite on the explored span; each
// iteration invokes it exactly once. Returns the iterate with the smallest
// residual norm seen. Throws NumericalError on non-finite values or on
// directions of non-positive curvature.
CgOutcome cg_solve(const LinearOperator& apply, const FlatVector& b, const CgConfig& config);

}  // namespace lfa
