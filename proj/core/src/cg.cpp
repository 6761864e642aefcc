#include "lfa/cg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lfa/errors.hpp"

namespace lfa {

CgOutcome cg_solve(const LinearOperator& apply, const FlatVector& b, const CgConfig& config) {
  if (config.max_iterations < 1) throw std::invalid_argument("cg max_iterations must be >= 1");
  if (!(config.rel_tolerance > 0.0)) throw std::invalid_argument("cg rel_tolerance must be > 0");
  if (!b.values.allFinite()) {
    throw NumericalError("cg right-hand side is not finite");
  }

  CgOutcome outcome;
  outcome.increment = FlatVector(b.shape);

  const double b_norm = b.values.norm();
  if (b_norm <= config.abs_floor) {
    outcome.converged = true;
    outcome.final_residual_norm = b_norm;
    return outcome;
  }
  const double threshold = std::max(config.rel_tolerance * b_norm, config.abs_floor);

  FlatVector x(b.shape);
  FlatVector residual = b;
  FlatVector direction = b;
  double rr = residual.values.squaredNorm();

  FlatVector best = x;
  double best_norm = b_norm;

  for (int k = 1; k <= config.max_iterations; ++k) {
    const FlatVector a_dir = apply(direction);
    const double curvature = direction.values.dot(a_dir.values);
    if (!std::isfinite(curvature)) {
      throw NumericalError("cg produced a non-finite curvature value");
    }
    if (curvature <= 0.0) {
      throw NumericalError("cg direction has non-positive curvature (" +
                           std::to_string(curvature) + "); the damped system lost positive "
                           "definiteness");
    }
    const double alpha = rr / curvature;
    x.values += alpha * direction.values;
    residual.values -= alpha * a_dir.values;

    const double r_norm = residual.values.norm();
    if (!std::isfinite(r_norm)) throw NumericalError("cg residual is not finite");
    outcome.iterations_used = k;
    if (r_norm < best_norm) {
      best = x;
      best_norm = r_norm;
    }
    if (r_norm <= threshold) {
      outcome.converged = true;
      break;
    }
    const double rr_next = residual.values.squaredNorm();
    direction.values = residual.values + (rr_next / rr) * direction.values;
    rr = rr_next;
  }

  outcome.increment = std::move(best);
  outcome.final_residual_norm = best_norm;
  return outcome;
}

}  // namespace lfa
