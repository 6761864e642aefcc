#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "lfa/dataset.hpp"
#include "lfa/model.hpp"

namespace lfa {

// One value per observed entry, aligned with HdiMatrix::entries() order.
struct EntryValues {
  Eigen::VectorXd values;
};

// Damping configuration for the regularized curvature product. Exactly one
// mode is active. In cubic mode eta = M * ||g||, where the gradient norm is
// snapshotted once per outer epoch and held fixed through all CG iterations
// of that epoch.
struct DampingSpec {
  enum class Mode { Cubic, Fixed };

  Mode mode = Mode::Fixed;
  double reg_strength = 0.0;       // lambda
  double cubic_coefficient = 0.0;  // M, cubic mode
  double fixed_damping = 0.0;      // gamma, fixed mode
  double gradient_norm = 0.0;      // ||g_E(y)|| snapshot, cubic mode

  static DampingSpec cubic(double lambda, double m, double grad_norm);
  static DampingSpec fixed(double lambda, double gamma);

  double eta() const {
    return mode == Mode::Cubic ? cubic_coefficient * gradient_norm : fixed_damping;
  }
};

// J v: per-entry sum_d (v_{u,d} y_{i,d} + y_{u,d} v_{i,d}).
EntryValues jacobian_vector(const LatentState& state, const HdiMatrix& matrix,
                            const FlatVector& v);

// J^T w: user slot (u,d) accumulates sum over R_{K_u} of w * y_{i,d}, item
// slot symmetric.
FlatVector jacobian_transpose_vector(const LatentState& state, const HdiMatrix& matrix,
                                     const EntryValues& w);

// Gauss-Newton product G v = J^T (J v).
FlatVector gauss_newton_vector(const LatentState& state, const HdiMatrix& matrix,
                               const FlatVector& v);

// c_E(y) = G v + lambda * D v + eta * v, where D carries |R_{K_u}| / |R_{K_i}|
// on the matching diagonal slots.
FlatVector regularized_hvp(const LatentState& state, const HdiMatrix& matrix,
                           const FlatVector& v, const DampingSpec& damping);

// Test oracle: materializes J row by row and returns J^T J + lambda D +
// eta I as a dense matrix. Guarded to sides <= 512.
Eigen::MatrixXd dense_curvature_oracle(const LatentState& state, const HdiMatrix& matrix,
                                       const DampingSpec& damping);

// Entry-touch instrumentation: each Jacobian pass counts one touch per
// observed entry, so one regularized_hvp adds exactly 2 * |R_K|.
std::uint64_t hvp_entry_touches();
void reset_hvp_entry_touches();

}  // namespace lfa
