#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>

#include "lfa/dataset.hpp"

namespace lfa {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Layout of the flattened parameter vector: user block first (row-major
// over users then dimensions), item block second.
struct FactorShape {
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  std::int32_t rank = 0;

  Eigen::Index size() const {
    return (static_cast<Eigen::Index>(num_users) + num_items) * rank;
  }
  Eigen::Index user_offset(std::int32_t u) const {
    return static_cast<Eigen::Index>(u) * rank;
  }
  Eigen::Index item_offset(std::int32_t i) const {
    return (static_cast<Eigen::Index>(num_users) + i) * rank;
  }
  bool operator==(const FactorShape&) const = default;
};

// Length (|U|+|I|)*f vector with user/item block views. Holds y, gradients,
// CG directions, and increments.
struct FlatVector {
  FactorShape shape;
  Eigen::VectorXd values;

  FlatVector() = default;
  explicit FlatVector(FactorShape s) : shape(s), values(Eigen::VectorXd::Zero(s.size())) {}

  double* user(std::int32_t u) { return values.data() + shape.user_offset(u); }
  const double* user(std::int32_t u) const { return values.data() + shape.user_offset(u); }
  double* item(std::int32_t i) { return values.data() + shape.item_offset(i); }
  const double* item(std::int32_t i) const { return values.data() + shape.item_offset(i); }

  double norm() const { return values.norm(); }
};

// Trainable factor matrices Y_U, Y_I plus the regularization strength.
struct LatentState {
  RowMatrixXd user_factors;  // |U| x f
  RowMatrixXd item_factors;  // |I| x f
  double reg_strength = 0.0;  // lambda

  std::int32_t num_users() const { return static_cast<std::int32_t>(user_factors.rows()); }
  std::int32_t num_items() const { return static_cast<std::int32_t>(item_factors.rows()); }
  std::int32_t rank() const { return static_cast<std::int32_t>(user_factors.cols()); }
  FactorShape shape() const { return {num_users(), num_items(), rank()}; }

  double* user_row(std::int32_t u) { return user_factors.data() + static_cast<Eigen::Index>(u) * rank(); }
  const double* user_row(std::int32_t u) const {
    return user_factors.data() + static_cast<Eigen::Index>(u) * rank();
  }
  double* item_row(std::int32_t i) { return item_factors.data() + static_cast<Eigen::Index>(i) * rank(); }
  const double* item_row(std::int32_t i) const {
    return item_factors.data() + static_cast<Eigen::Index>(i) * rank();
  }

  // vec(Y_U, Y_I)
  FlatVector to_flat() const;
  static LatentState from_flat(const FlatVector& flat, double reg_strength);
  // y += delta
  void add_increment(const FlatVector& delta);
  bool all_finite() const;
};

// Every entry drawn independently from [0, hi) with SeededRng(seed).
LatentState init_uniform(std::int32_t num_users, std::int32_t num_items, std::int32_t rank,
                         double hi, std::uint64_t seed);

// Bilinear prediction sum_d y_{u,d} y_{i,d}.
double predict(const LatentState& state, std::int32_t u, std::int32_t i);

// E(y) = 1/2 sum_{(u,i) observed} [(r - yhat)^2 + lambda * (|y_u|^2 + |y_i|^2)].
// The regularizer is summed per observed entry, so y_u is penalized once per
// rating of user u; the gradient and curvature diagonals carry the matching
// |R_{K_u}| factors.
double objective(const LatentState& state, const HdiMatrix& matrix);

// Flat gradient of objective(). Accumulation runs in the matrix's canonical
// (user, item) entry order, so the result does not depend on input order.
FlatVector gradient(const LatentState& state, const HdiMatrix& matrix);

// sqrt(mean squared residual) over a non-empty evaluation set.
double rmse(const LatentState& state, std::span<const RatingTriple> eval_set);

}  // namespace lfa
